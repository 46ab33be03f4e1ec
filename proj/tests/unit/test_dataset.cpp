#include "helpers.hpp"

#include "modalforge/dataset.hpp"
#include "modalforge/sdof.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

using namespace modalforge;
using namespace modalforge::dataset;
using doctest::Approx;
using testing::expect_error;

namespace {

ParameterSpace small_space(std::size_t count, std::uint64_t seed) {
    ParameterSpace s;
    s.m = {0.5, 50.0};
    s.k = {1.0, 500.0};
    s.c = {0.05, 5.0};
    s.sampling = LogUniformSampling{count, seed};
    return s;
}

excitation::ExcitationSpec fixture_excitation() {
    return excitation::BaseRecord{excitation::load_ground_motion(testing::fixture_motion()), 1.0};
}

std::string csv_of(const Dataset& d) {
    std::ostringstream out;
    write_dataset_csv(d, out);
    return out.str();
}

}  // namespace

TEST_SUITE("dataset") {

TEST_CASE("grid sampling is a Cartesian product with m outermost") {
    ParameterSpace s;
    s.m = {1.0, 2.0};
    s.k = {10.0, 10.0};
    s.c = {0.1, 0.2};
    s.sampling = GridSampling{2, 1, 2};
    const auto t = sample_parameters(s);
    const std::vector<ParameterTriple> expected{{1, 10, 0.1}, {1, 10, 0.2}, {2, 10, 0.1}, {2, 10, 0.2}};
    CHECK(t == expected);

    s.m = {1.0, 100.0};
    s.sampling = GridSampling{3, 1, 1};
    const auto g = sample_parameters(s);
    REQUIRE(g.size() == 3);
    CHECK(g[1].m == Approx(10.0).epsilon(1e-12));
    CHECK(g[0].c == Approx(std::sqrt(0.1 * 0.2)));
}

TEST_CASE("log-uniform sampling") {
    CHECK(sample_parameters(small_space(0, 1)).empty());

    ParameterSpace s;
    s.m = {1.0, 1000.0};
    s.sampling = LogUniformSampling{10000, 123};
    const auto t = sample_parameters(s);
    REQUIRE(t.size() == 10000);
    double mean = 0.0;
    for (const auto& x : t) {
        CHECK(s.m.contains(x.m));
        CHECK(s.k.contains(x.k));
        CHECK(s.c.contains(x.c));
        mean += std::log10(x.m);
    }
    mean /= 10000.0;
    CHECK(mean == Approx(1.5).epsilon(0.05 / 1.5));
    CHECK(sample_parameters(s) == t);
}

TEST_CASE("space validation") {
    ParameterSpace s;
    s.m = {5.0, 5.0};
    s.sampling = GridSampling{2, 1, 1};
    expect_error(ErrorKind::Config, [&] { (void)sample_parameters(s); });
    s.sampling = LogUniformSampling{10, 1};
    expect_error(ErrorKind::Config, [&] { (void)sample_parameters(s); });
    s.m = {2.0, 1.0};
    expect_error(ErrorKind::Config, [&] { s.validate(); });
    s.m = {0.0, 1.0};
    expect_error(ErrorKind::Config, [&] { s.validate(); });
    s.m = {1.0, 2.0};
    s.c = {0.001, 1.0};
    expect_error(ErrorKind::Config, [&] { s.validate(); });
    s.c = {0.02, 1.0};
    s.sampling = GridSampling{0, 1, 1};
    expect_error(ErrorKind::Config, [&] { s.validate(); });
}

TEST_CASE("sample count") {
    CHECK(sample_count(0.02, 40.0) == 2001);
    CHECK(sample_count(0.1, 1.0) == 11);
    expect_error(ErrorKind::Config, [] { (void)sample_count(0.0, 1.0); });
    expect_error(ErrorKind::Config, [] { (void)sample_count(1.0, 0.5); });
}

TEST_CASE("a generated peak equals an independent single run") {
    ParameterSpace s;
    const double m = 3.531117, k = 521.429791;
    const double c = 2.0 * 0.093387 * std::sqrt(k * m);
    s.m = {m, m};
    s.k = {k, k};
    s.c = {c, c};
    s.sampling = GridSampling{1, 1, 1};
    const auto spec = fixture_excitation();
    const auto ds = generate_dataset(s, spec, 0.02, 40.0);
    REQUIRE(ds.records.size() == 1);

    const auto& rec = std::get<excitation::BaseRecord>(spec).record;
    std::vector<double> p(2001, 0.0);
    for (std::size_t i = 0; i < rec.accel.size() && i < p.size(); ++i) p[i] = -m * rec.accel[i];
    const auto h = dyno::newmark_solve(dyno::SdofSystem(m, k, c), {}, p, {.gamma = 0.5, .beta = 0.25, .dt = 0.02});
    double peak = 0.0;
    for (double u : h.u) peak = std::max(peak, std::abs(u));
    CHECK(ds.records[0].u_max == peak);
}

TEST_CASE("free excitation from rest gives zero peaks") {
    const auto ds = generate_dataset(small_space(20, 3), excitation::Free{}, 0.02, 2.0);
    for (const auto& r : ds.records) CHECK(r.u_max == 0.0);
}

TEST_CASE("property: generation is deterministic and independent of worker count") {
    const auto spec = fixture_excitation();
    const auto a = generate_dataset(small_space(60, 5), spec, 0.02, 20.0, {.workers = 1});
    const auto b = generate_dataset(small_space(60, 5), spec, 0.02, 20.0, {.workers = 1});
    const auto c = generate_dataset(small_space(60, 5), spec, 0.02, 20.0, {.workers = 4});
    CHECK(csv_of(a) == csv_of(b));
    CHECK(csv_of(a) == csv_of(c));
    CHECK(a == c);
    for (const auto& r : a.records) CHECK(r.u_max > 0.0);
}

TEST_CASE("errors identify the failing sample") {
    ParameterSpace s;
    s.m = {1.0, 1.0};
    s.k = {1.0, 1.0};
    s.c = {0.1, 0.1};
    s.sampling = GridSampling{1, 1, 1};
    excitation::GroundMotionRecord bad_dt{0.01, {1.0}, ""};
    const auto msg = expect_error(ErrorKind::Config, [&] {
        (void)generate_dataset(s, excitation::BaseRecord{bad_dt, 1.0}, 0.02, 1.0);
    });
    CHECK(msg.find("m=1") != std::string::npos);
}

TEST_CASE("splitting") {
    Dataset d;
    d.records.resize(10);
    const auto s = split_dataset(d, 0.2, 1);
    CHECK(s.test.size() == 2);
    CHECK(s.train.size() == 8);
    std::set<std::size_t> all(s.train.begin(), s.train.end());
    for (auto i : s.test) CHECK(all.insert(i).second);
    CHECK(all.size() == 10);
    CHECK(std::is_sorted(s.train.begin(), s.train.end()));

    const auto z = split_dataset(d, 0.0, 1);
    CHECK(z.train.size() == 10);
    CHECK(z.test.empty());
    CHECK(split_dataset(d, 0.2, 1).test == s.test);
    expect_error(ErrorKind::Config, [&] { (void)split_dataset(d, 1.0, 1); });
}

TEST_CASE("property: independent splits overlap by the hypergeometric expectation") {
    Dataset d;
    d.records.resize(1000);
    double total = 0.0;
    const int pairs = 25;
    for (int p = 0; p < pairs; ++p) {
        const auto a = split_dataset(d, 0.2, 1000 + 2 * p);
        const auto b = split_dataset(d, 0.2, 1001 + 2 * p);
        CHECK(a.test != b.test);
        std::vector<std::size_t> common;
        std::set_intersection(a.test.begin(), a.test.end(), b.test.begin(), b.test.end(), std::back_inserter(common));
        total += static_cast<double>(common.size());
    }
    CHECK(total / pairs == Approx(40.0).epsilon(0.1));
}

TEST_CASE("write and read round-trip") {
    auto d = generate_dataset(small_space(3, 8), fixture_excitation(), 0.02, 5.0);
    d = split_dataset(d, 0.34, 4);
    d.ground_motion_sha256 = "abc123";
    std::ostringstream csv, meta;
    write_dataset_csv(d, csv, {"a comment"});
    write_dataset_meta(d, meta);
    std::istringstream csv_in(csv.str()), meta_in(meta.str());
    CHECK(read_dataset(csv_in, &meta_in) == d);

    testing::ScratchDir dir("dataset_rt");
    save_dataset(d, dir / "d.csv");
    CHECK(load_dataset(dir / "d.csv") == d);
    CHECK(std::filesystem::exists(dir / "d.csv.meta.json"));
}

TEST_CASE("reading hand-written files") {
    std::istringstream header_only("m_kg,k_N_per_m,c_Ns_per_m,u_max_m\n");
    CHECK(read_dataset(header_only).records.empty());

    std::istringstream two("# hand written\nm_kg,k_N_per_m,c_Ns_per_m,u_max_m\n1.5,20,0.3,0.01\r\n2,40,0.5,0.002\n");
    const auto d = read_dataset(two);
    REQUIRE(d.records.size() == 2);
    CHECK(d.records[0] == SampleRecord{1.5, 20.0, 0.3, 0.01});
    CHECK(d.records[1] == SampleRecord{2.0, 40.0, 0.5, 0.002});
    CHECK(d.train.size() == 2);

    std::istringstream bad("m_kg,k_N_per_m,c_Ns_per_m,u_max_m\n1,2,3,4\n1,2,x,4\n");
    auto msg = expect_error(ErrorKind::Data, [&] { (void)read_dataset(bad); });
    CHECK(msg.find("line 3") != std::string::npos);

    std::istringstream short_row("m_kg,k_N_per_m,c_Ns_per_m,u_max_m\n1,2,3\n");
    msg = expect_error(ErrorKind::Data, [&] { (void)read_dataset(short_row); });
    CHECK(msg.find("line 2") != std::string::npos);

    std::istringstream wrong_header("m,k,c,u\n");
    expect_error(ErrorKind::Data, [&] { (void)read_dataset(wrong_header); });
}

TEST_CASE("metadata integrity") {
    auto d = generate_dataset(small_space(4, 2), excitation::Free{}, 0.1, 1.0);
    d = split_dataset(d, 0.25, 1);
    std::ostringstream meta;
    write_dataset_meta(d, meta);

    std::istringstream fewer("m_kg,k_N_per_m,c_Ns_per_m,u_max_m\n1,2,3,0\n");
    std::istringstream meta_in(meta.str());
    const auto msg = expect_error(ErrorKind::Data, [&] { (void)read_dataset(fewer, &meta_in); });
    CHECK(msg.find("integrity") != std::string::npos);

    std::istringstream csv_in(csv_of(d));
    std::istringstream garbage("{not json");
    expect_error(ErrorKind::Data, [&] { (void)read_dataset(csv_in, &garbage); });
    expect_error(ErrorKind::Data, [] { (void)load_dataset("/nonexistent/dataset.csv"); });
}

TEST_CASE("property: more damping never raises the free-vibration peak") {
    const double m = 3.531117, k = 521.429791;
    double prev = INFINITY;
    for (double zeta : {0.01, 0.05, 0.1, 0.3, 0.8}) {
        const double c = dyno::damping_from_ratio(m, k, zeta);
        std::vector<double> zero(2001, 0.0);
        const auto h = dyno::newmark_solve(dyno::SdofSystem(m, k, c), {0.01, 0.0}, zero,
                                           {.gamma = 0.5, .beta = 0.25, .dt = 0.02});
        const double peak = dyno::max_abs_displacement(h);
        CHECK(peak <= prev);
        prev = peak;
    }
}

}
