#pragma once

#include "modalforge/error.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>
#include <unistd.h>

namespace testing {

// Runs `fn` and checks it throws modalforge::Error of `kind`; returns the message.
template <class Fn>
std::string expect_error(modalforge::ErrorKind kind, Fn&& fn) {
    try {
        fn();
    } catch (const modalforge::Error& e) {
        CHECK_MESSAGE(e.kind() == kind, "got " << std::string(modalforge::to_string(e.kind())) << ": " << std::string(e.what()));
        return e.what();
    }
    FAIL("expected " << modalforge::to_string(kind));
    return {};
}

inline std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline void spit(const std::filesystem::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    out << text;
}

// Fresh scratch directory, removed on destruction.
class ScratchDir {
public:
    explicit ScratchDir(const std::string& name)
        : path_(std::filesystem::temp_directory_path() / ("modalforge_" + name + "_" + std::to_string(::getpid()))) {
        std::filesystem::remove_all(path_);
        std::filesystem::create_directories(path_);
    }
    ~ScratchDir() { std::filesystem::remove_all(path_); }
    ScratchDir(const ScratchDir&) = delete;
    ScratchDir& operator=(const ScratchDir&) = delete;

    [[nodiscard]] const std::filesystem::path& path() const { return path_; }
    [[nodiscard]] std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

private:
    std::filesystem::path path_;
};

inline std::filesystem::path source_dir() { return MODALFORGE_SOURCE_DIR; }
inline std::filesystem::path fixture_motion() { return source_dir() / "data" / "synthetic_ns_dt002.txt"; }

}  // namespace testing
