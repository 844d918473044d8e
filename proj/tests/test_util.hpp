#pragma once

#include <catch2/catch_amalgamated.hpp>

#include <atomic>
#include <filesystem>
#include <random>
#include <string>
#include <unistd.h>

#include "cnmft/error.hpp"

/// Unique scratch directory, removed on destruction.
struct TempDir {
    std::filesystem::path path;

    TempDir() {
        static std::atomic<int> counter{0};
        path = std::filesystem::temp_directory_path() /
               ("cnmft_test_" + std::to_string(::getpid()) + "_" +
                std::to_string(counter.fetch_add(1)));
        std::filesystem::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;
};

/// Matches a cnmft::Error carrying a specific error code.
class HasCode : public Catch::Matchers::MatcherBase<cnmft::Error> {
public:
    explicit HasCode(cnmft::Errc code) : code_(code) {}
    bool match(const cnmft::Error& e) const override { return e.code() == code_; }
    std::string describe() const override {
        return "has error code " + std::to_string(static_cast<int>(code_));
    }

private:
    cnmft::Errc code_;
};

/// Deterministic uniform doubles for test data.
struct Rng {
    std::mt19937_64 eng;
    explicit Rng(uint64_t seed) : eng(seed) {}
    double u01() { return static_cast<double>(eng() >> 11) * 0x1.0p-53; }
    double uniform(double lo, double hi) { return lo + (hi - lo) * u01(); }
    std::size_t index(std::size_t n) { return static_cast<std::size_t>(eng() % n); }
};
