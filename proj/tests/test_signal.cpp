#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "ahpc/errors.hpp"
#include "ahpc/rng.hpp"
#include "ahpc/signal.hpp"
#include "ahpc/synth.hpp"

using namespace ahpc;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir() {
    static fs::path dir = [] {
        auto d = fs::temp_directory_path() / "ahpc_test_signal";
        fs::create_directories(d);
        return d;
    }();
    return dir;
}

void write_raw16(const fs::path& path, const std::vector<std::int16_t>& samples) {
    std::ofstream out(path, std::ios::binary);
    for (std::int16_t v : samples) {
        const char b[2] = {static_cast<char>(v & 0xff), static_cast<char>((v >> 8) & 0xff)};
        out.write(b, 2);
    }
}

} // namespace

TEST_CASE("raw16le load scales by the source bit depth") {
    const auto path = temp_dir() / "two.raw";
    write_raw16(path, {0, -2048});
    const SignalBuffer s = load_pcm(path, PcmFormat::raw16le, 12);
    REQUIRE(s.samples.size() == 2);
    CHECK(s.samples[0] == 0.0);
    CHECK(s.samples[1] == -1.0); // full-scale negative of 12-bit

    write_raw16(path, {1024});
    CHECK(load_pcm(path, PcmFormat::raw16le, 12).samples[0] == 0.5);
}

TEST_CASE("raw16le rejects odd byte length and missing files") {
    const auto path = temp_dir() / "odd.raw";
    std::ofstream(path, std::ios::binary).write("abc", 3);
    CHECK_THROWS_AS(load_pcm(path, PcmFormat::raw16le, 16), Error);
    CHECK_THROWS_AS(load_pcm(temp_dir() / "nope.raw", PcmFormat::raw16le, 16), Error);
}

TEST_CASE("save_pcm quantizes and saturates") {
    SignalBuffer s;
    s.samples = {0.0, 1.0, -1.0};
    const auto path = temp_dir() / "sat.raw";
    save_pcm(s, path, PcmFormat::raw16le);

    std::ifstream in(path, std::ios::binary);
    std::int16_t vals[3];
    in.read(reinterpret_cast<char*>(vals), sizeof vals);
    CHECK(vals[0] == 0);
    CHECK(vals[1] == 32767); // clipped
    CHECK(vals[2] == -32768);
}

TEST_CASE("wav round trip preserves samples to the container step") {
    SplitMix64 rng(7);
    SignalBuffer s;
    s.sample_rate_hz = 8000;
    s.samples.resize(1000);
    for (double& v : s.samples) v = rng.next_symmetric(0.99);

    const auto path = temp_dir() / "rt.wav";
    save_pcm(s, path, PcmFormat::wav);
    const SignalBuffer back = load_pcm(path, PcmFormat::wav, 0);
    REQUIRE(back.samples.size() == s.samples.size());
    CHECK(back.sample_rate_hz == 8000);
    CHECK(back.source_bit_depth == 16);
    for (std::size_t i = 0; i < s.samples.size(); ++i)
        CHECK(std::fabs(back.samples[i] - s.samples[i]) < 0x1p-15);

    // Reloading what we saved is exact: the file already sits on the grid.
    save_pcm(back, path, PcmFormat::wav);
    const SignalBuffer again = load_pcm(path, PcmFormat::wav, 0);
    CHECK(again.samples == back.samples);
}

TEST_CASE("wav loader rejects junk") {
    const auto path = temp_dir() / "junk.wav";
    std::ofstream(path, std::ios::binary).write("RIFFxxxxJUNK", 12);
    CHECK_THROWS_AS(load_pcm(path, PcmFormat::wav, 0), Error);
}

TEST_CASE("frames covers the signal with a trailing partial frame") {
    std::vector<double> x(250);
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = static_cast<double>(i);

    const auto fv = frames(x, 100);
    REQUIRE(fv.size() == 3);
    CHECK(fv[0].samples.size() == 100);
    CHECK(fv[1].samples.size() == 100);
    CHECK(fv[2].samples.size() == 50);

    // Concatenation reproduces the signal.
    std::vector<double> cat;
    for (const auto& f : fv) cat.insert(cat.end(), f.samples.begin(), f.samples.end());
    CHECK(cat == x);

    CHECK(frames(std::vector<double>(100, 0.0), 100).size() == 1);

    // Frame 1 history of order 10 is samples 90..99; frame 0 history is zeros.
    const auto h1 = fv[1].history(10);
    for (int i = 0; i < 10; ++i) CHECK(h1[static_cast<std::size_t>(i)] == 90.0 + i);
    const auto h0 = fv[0].history(10);
    for (double v : h0) CHECK(v == 0.0);
}

TEST_CASE("segsnr of identical signals clamps to the ceiling") {
    const auto x = synth::speech_like_ar(1000, 3);
    const auto rep = segsnr(x, x);
    CHECK(rep.segment_count == 5);
    CHECK(rep.segsnr_db == 80.0);
    CHECK(rep.std_db == 0.0);
}

TEST_CASE("segsnr matches the formula on a constant-ratio signal") {
    // Per-segment ratio 100 exactly: signal 0.5, error 0.05.
    std::vector<double> x(400, 0.5), y(400, 0.45);
    const auto rep = segsnr(x, y);
    CHECK(rep.segsnr_db == doctest::Approx(20.0).epsilon(1e-12));
}

TEST_CASE("segsnr agrees with an independent evaluation on noisy signals") {
    SplitMix64 rng(11);
    std::vector<double> x(2000), y(2000);
    for (std::size_t i = 0; i < x.size(); ++i) {
        x[i] = rng.next_symmetric(0.8);
        y[i] = x[i] + 0.01 * rng.next_gaussian();
    }
    // Independent scalar evaluation, long-double accumulation.
    long double mean = 0.0L;
    const std::size_t segs = x.size() / 200;
    for (std::size_t s = 0; s < segs; ++s) {
        long double sig = 0.0L, err = 0.0L;
        for (std::size_t i = 0; i < 200; ++i) {
            const long double xv = x[s * 200 + i];
            const long double d = xv - y[s * 200 + i];
            sig += xv * xv;
            err += d * d;
        }
        long double db = 10.0L * std::log10(static_cast<double>(sig / err));
        if (db < 0.0L) db = 0.0L;
        if (db > 80.0L) db = 80.0L;
        mean += db;
    }
    mean /= segs;
    const auto rep = segsnr(x, y);
    CHECK(rep.segsnr_db == doctest::Approx(static_cast<double>(mean)).epsilon(1e-3));
    CHECK(std::fabs(rep.segsnr_db - static_cast<double>(mean)) < 0.1);
}

TEST_CASE("segsnr is invariant under common scaling") {
    SplitMix64 rng(13);
    std::vector<double> x(600), y(600);
    for (std::size_t i = 0; i < x.size(); ++i) {
        x[i] = rng.next_symmetric(0.5);
        y[i] = x[i] + 0.02 * rng.next_gaussian();
    }
    std::vector<double> xs(x), ys(y);
    for (auto& v : xs) v *= 3.7;
    for (auto& v : ys) v *= 3.7;
    CHECK(segsnr(x, y).segsnr_db == doctest::Approx(segsnr(xs, ys).segsnr_db).epsilon(1e-12));
}

TEST_CASE("segsnr edge segments clamp instead of diverging") {
    std::vector<double> x(200, 0.0), y(200, 0.01); // silent original, noisy decode
    CHECK(segsnr(x, y).segsnr_db == 0.0);

    std::vector<double> x2(200, 0.3), y2(x2); // perfectly coded
    CHECK(segsnr(x2, y2).segsnr_db == 80.0);
}

TEST_CASE("segsnr validates its inputs") {
    std::vector<double> a(300, 0.1), b(200, 0.1);
    CHECK_THROWS_AS(segsnr(a, b), Error);
    std::vector<double> c(100, 0.1);
    CHECK_THROWS_AS(segsnr(c, c, 200), Error);
}

TEST_CASE("trailing partial segment is dropped") {
    std::vector<double> x(450, 0.2), y(450, 0.19);
    CHECK(segsnr(x, y).segment_count == 2);
}
