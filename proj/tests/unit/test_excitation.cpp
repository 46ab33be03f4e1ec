#include "helpers.hpp"

#include "modalforge/checksum.hpp"
#include "modalforge/excitation.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

using namespace modalforge;
using namespace modalforge::excitation;
using doctest::Approx;
using testing::expect_error;

namespace {

constexpr const char* kFixtureSha256 = "4d5bbb10045ee4986de4cd4889566e570b0371d09a458776dd2287b27d0a0c56";

}  // namespace

TEST_SUITE("excitation") {

TEST_CASE("parse the minimal format") {
    const auto r = parse_ground_motion("dt=0.02\n0.0\n0.1\n\xE2\x88\x92" "0.05\n");
    CHECK(r.dt == 0.02);
    CHECK(r.accel == std::vector<double>{0.0, 0.1, -0.05});
}

TEST_CASE("parse comments, blank lines and CRLF") {
    const auto r = parse_ground_motion("# recorded somewhere\r\n\r\ndt=0.01\r\n1.5\r\n# mid comment\r\n-2e-1\r\n  3  \r\n");
    CHECK(r.dt == 0.01);
    CHECK(r.accel == std::vector<double>{1.5, -0.2, 3.0});
}

TEST_CASE("parse errors") {
    expect_error(ErrorKind::Data, [] { (void)parse_ground_motion(""); });
    expect_error(ErrorKind::Data, [] { (void)parse_ground_motion("dt=0.02\n"); });
    expect_error(ErrorKind::Data, [] { (void)parse_ground_motion("0.1\n0.2\n"); });
    auto msg = expect_error(ErrorKind::Data, [] { (void)parse_ground_motion("dt=0.02\n0.1\n# note\nabc\n"); });
    CHECK(msg.find("line 4") != std::string::npos);
    msg = expect_error(ErrorKind::Data, [] { (void)parse_ground_motion("dt=0\n0.1\n"); });
    CHECK(msg.find("line 1") != std::string::npos);
    expect_error(ErrorKind::Data, [] { (void)parse_ground_motion("dt=-0.5\n0.1\n"); });
    expect_error(ErrorKind::Data, [] { (void)parse_ground_motion("dt=0.02\n0.1 0.2\n"); });
    expect_error(ErrorKind::Data, [] { (void)parse_ground_motion("dt=0.02\nnan\n"); });
    expect_error(ErrorKind::Data, [] { (void)load_ground_motion("/nonexistent/motion.txt"); });
}

TEST_CASE("bundled record: sample count and peak from an independent scan") {
    const auto path = testing::fixture_motion();
    CHECK(sha256_file(path) == kFixtureSha256);

    const auto r = load_ground_motion(path);
    std::istringstream in(testing::slurp(path));
    std::string line;
    std::size_t data_lines = 0;
    double peak = 0.0;
    bool header = false;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        if (!header) {
            header = true;
            continue;
        }
        ++data_lines;
        peak = std::max(peak, std::abs(std::stod(line)));
    }
    CHECK(r.accel.size() == data_lines);
    double lib_peak = 0.0;
    for (double a : r.accel) lib_peak = std::max(lib_peak, std::abs(a));
    CHECK(lib_peak == peak);
    CHECK(r.dt == 0.02);
}

TEST_CASE("write then parse round-trips exactly") {
    std::mt19937_64 rng(1);
    std::normal_distribution<double> n(0.0, 3.0);
    GroundMotionRecord r{0.005, {}, "roundtrip"};
    for (int i = 0; i < 500; ++i) r.accel.push_back(n(rng));
    std::ostringstream out;
    write_ground_motion(r, out);
    const auto back = parse_ground_motion(out.str(), "roundtrip");
    CHECK(back.dt == r.dt);
    CHECK(back.accel == r.accel);
}

TEST_CASE("synthesized forcing") {
    CHECK(synthesize_force(Free{}, 2.0, 0.1, 4) == std::vector<double>{0, 0, 0, 0});

    const auto pulse = synthesize_force(HalfSinePulse{10.0, 0.6}, 1.0, 0.1, 7);
    const std::vector<double> expected{0.0, 5.0, 8.6603, 10.0, 8.6603, 5.0, 0.0};
    REQUIRE(pulse.size() == 7);
    for (std::size_t i = 0; i < 7; ++i) CHECK(pulse[i] == Approx(expected[i]).epsilon(1e-4));
    CHECK(std::abs(pulse[6]) < 1e-12);

    const GroundMotionRecord one{0.1, {1.0}, ""};
    CHECK(synthesize_force(BaseRecord{one, 1.0}, 2.0, 0.1, 1) == std::vector<double>{-2.0});

    const auto sine = synthesize_force(Sine{3.0, 2.0}, 1.0, 0.05, 50);
    for (std::size_t i = 0; i < sine.size(); ++i) CHECK(sine[i] == Approx(3.0 * std::sin(2.0 * 0.05 * i)));

    const auto padded = synthesize_force(BaseRecord{GroundMotionRecord{0.1, {1.0, -1.0}, ""}, 1.0}, 1.0, 0.1, 5);
    CHECK(padded == std::vector<double>{-1.0, 1.0, 0.0, 0.0, 0.0});

    expect_error(ErrorKind::Config, [] {
        (void)synthesize_force(BaseRecord{GroundMotionRecord{0.02, {1.0}, ""}, 1.0}, 1.0, 0.01, 3);
    });
    expect_error(ErrorKind::InvalidParameter, [] { (void)synthesize_force(Free{}, 1.0, 0.0, 3); });
    expect_error(ErrorKind::InvalidInput, [] { (void)synthesize_force(Free{}, 1.0, 0.1, 0); });
}

TEST_CASE("excitation validation") {
    expect_error(ErrorKind::InvalidParameter, [] { validate(HalfSinePulse{1.0, 0.0}); });
    expect_error(ErrorKind::InvalidParameter, [] { validate(HalfSinePulse{NAN, 1.0}); });
    expect_error(ErrorKind::InvalidParameter, [] { validate(Sine{INFINITY, 1.0}); });
    expect_error(ErrorKind::InvalidParameter, [] { validate(BaseRecord{GroundMotionRecord{0.1, {1.0}, ""}, NAN}); });
    expect_error(ErrorKind::InvalidParameter, [] { validate(BaseRecord{GroundMotionRecord{0.1, {}, ""}, 1.0}); });
    CHECK(kind_name(Free{}) == "free");
    CHECK(kind_name(BaseRecord{}) == "base_record");
}

TEST_CASE("property: free forcing is identically zero") {
    for (std::size_t n : {1u, 2u, 17u, 1000u}) {
        for (double x : synthesize_force(Free{}, 3.0, 0.01, n)) CHECK(x == 0.0);
    }
}

TEST_CASE("property: half-sine pulse vanishes after its duration") {
    for (double td : {0.05, 0.33, 0.6, 1.7}) {
        const double dt = 0.01;
        const auto f = synthesize_force(HalfSinePulse{4.0, td}, 1.0, dt, 400);
        for (std::size_t i = 0; i < f.size(); ++i) {
            if (static_cast<double>(i) * dt > td) CHECK(f[i] == 0.0);
        }
    }
}

TEST_CASE("property: base forcing is linear in mass and scale") {
    const auto rec = load_ground_motion(testing::fixture_motion());
    const auto ref = synthesize_force(BaseRecord{rec, 1.0}, 1.0, rec.dt, 2000);
    for (double m : {0.5, 3.0}) {
        for (double s : {-1.0, 9.81}) {
            const auto f = synthesize_force(BaseRecord{rec, s}, m, rec.dt, 2000);
            for (std::size_t i = 0; i < f.size(); ++i) CHECK(f[i] == Approx(m * s * ref[i]).epsilon(1e-14));
        }
    }
}

TEST_CASE("resampling") {
    const auto a = resample_record(GroundMotionRecord{0.02, {0.0, 1.0}, ""}, 0.01);
    CHECK(a.dt == 0.01);
    REQUIRE(a.accel.size() == 3);
    CHECK(a.accel[0] == 0.0);
    CHECK(a.accel[1] == Approx(0.5));
    CHECK(a.accel[2] == 1.0);

    const auto b = resample_record(GroundMotionRecord{0.1, {0.0, 2.0, 0.0}, ""}, 0.05);
    REQUIRE(b.accel.size() == 5);
    const std::vector<double> hand{0.0, 1.0, 2.0, 1.0, 0.0};
    for (std::size_t i = 0; i < 5; ++i) CHECK(b.accel[i] == Approx(hand[i]).epsilon(1e-12));

    const auto rec = load_ground_motion(testing::fixture_motion());
    const auto same = resample_record(rec, rec.dt);
    CHECK(same.accel == rec.accel);
    CHECK(same.dt == rec.dt);

    expect_error(ErrorKind::InvalidParameter, [&] { (void)resample_record(rec, 0.0); });
}

TEST_CASE("property: resampling stays within the original range and keeps endpoints") {
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> u(-5.0, 5.0);
    std::uniform_int_distribution<int> len(2, 60);
    for (int trial = 0; trial < 50; ++trial) {
        GroundMotionRecord r{0.02, {}, ""};
        const int n = len(rng);
        for (int i = 0; i < n; ++i) r.accel.push_back(u(rng));
        const auto [lo, hi] = std::minmax_element(r.accel.begin(), r.accel.end());
        for (double new_dt : {0.005, 0.01, 0.013, 0.04, 0.07}) {
            const auto s = resample_record(r, new_dt);
            CHECK(s.accel.front() == r.accel.front());
            for (double x : s.accel) {
                CHECK(x >= *lo);
                CHECK(x <= *hi);
            }
            const double ratio = 0.02 / new_dt;
            if (std::abs(ratio - std::round(ratio)) < 1e-9) CHECK(s.accel.back() == r.accel.back());
        }
    }
}

TEST_CASE("synthetic accelerogram is deterministic and scaled to its peak") {
    SyntheticMotionSpec spec;
    const auto a = synthesize_ground_motion(spec);
    const auto b = synthesize_ground_motion(spec);
    CHECK(a.accel == b.accel);
    CHECK(a.accel.size() == 1501);
    double peak = 0.0;
    for (double x : a.accel) peak = std::max(peak, std::abs(x));
    CHECK(peak == Approx(spec.pga).epsilon(1e-12));
    spec.seed = 7;
    CHECK(synthesize_ground_motion(spec).accel != a.accel);
    spec.pga = 0.0;
    expect_error(ErrorKind::InvalidParameter, [&] { (void)synthesize_ground_motion(spec); });
}

TEST_CASE("checksums") {
    CHECK(sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
    CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    expect_error(ErrorKind::Data, [] { (void)sha256_file("/nonexistent/file"); });
}

}
