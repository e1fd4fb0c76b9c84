// End-to-end checks of the installed command line. Each case shells out
// to the real binary; AHPC_CLI_PATH is injected by the build.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;

namespace {

const std::string cli = AHPC_CLI_PATH;

fs::path work_dir() {
    static fs::path dir = [] {
        auto d = fs::temp_directory_path() / "ahpc_test_cli";
        fs::remove_all(d);
        fs::create_directories(d);
        return d;
    }();
    return dir;
}

int run(const std::string& args, std::string* output = nullptr) {
    const fs::path log = work_dir() / "last_output.txt";
    const std::string full = cli + " " + args + " > " + log.string() + " 2>&1";
    const int status = std::system(full.c_str());
    if (output) {
        std::ifstream in(log);
        std::stringstream ss;
        ss << in.rdbuf();
        *output = ss.str();
    }
    return WEXITSTATUS(status);
}

std::vector<char> slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return std::vector<char>((std::istreambuf_iterator<char>(in)),
                             std::istreambuf_iterator<char>());
}

std::size_t count_lines(const fs::path& p) {
    std::ifstream in(p);
    std::string line;
    std::size_t n = 0;
    while (std::getline(in, line)) ++n;
    return n;
}

const std::string fast = " --epochs 2 --starts 2";

} // namespace

TEST_CASE("synth then encode then decode round trip") {
    const auto wav = (work_dir() / "in.wav").string();
    const auto stream = (work_dir() / "in.ahpc").string();
    const auto back = (work_dir() / "out.wav").string();

    CHECK(run("synth --kind ar --seconds 1 --seed 3 --out " + wav) == 0);
    std::string out;
    CHECK(run("encode " + wav + " " + stream + " --nq 4 --seed 9" + fast, &out) == 0);
    CHECK(out.find("bits/sample") != std::string::npos);
    CHECK(out.find("segsnr vs input") != std::string::npos);

    CHECK(run("decode " + stream + " " + back + fast, &out) == 0);
    CHECK(out.find("stream: v1 backward/hybrid nq=4") != std::string::npos);
    CHECK(fs::exists(back));

    CHECK(fs::file_size(back) > 44); // wav header plus payload
}

TEST_CASE("encode is deterministic across processes") {
    const auto wav = (work_dir() / "det.wav").string();
    const auto s1 = (work_dir() / "det1.ahpc").string();
    const auto s2 = (work_dir() / "det2.ahpc").string();
    CHECK(run("synth --kind sat-ar --seconds 1 --seed 5 --out " + wav) == 0);
    CHECK(run("encode " + wav + " " + s1 + " --seed 77" + fast) == 0);
    CHECK(run("encode " + wav + " " + s2 + " --seed 77" + fast) == 0);
    CHECK(slurp(s1) == slurp(s2));
    CHECK(!slurp(s1).empty());
}

TEST_CASE("flag validation rejects nq=7") {
    std::string out;
    const int rc = run("encode a b --nq 7", &out);
    CHECK(rc != 0);
    CHECK(out.find("ahpc: error: E_ARGS") != std::string::npos);
}

TEST_CASE("decode rejects a non-stream file") {
    const auto junk = work_dir() / "junk.bin";
    std::ofstream(junk, std::ios::binary) << "definitely not a stream";
    std::string out;
    const int rc = run("decode " + junk.string() + " " + (work_dir() / "x.wav").string(), &out);
    CHECK(rc == 1);
    CHECK(out.find("E_BAD_MAGIC") != std::string::npos);
    CHECK(out.find("not an AHPC stream") != std::string::npos);
}

TEST_CASE("decode rejects a truncated stream and suppresses output") {
    const auto wav = (work_dir() / "t.wav").string();
    const auto stream = work_dir() / "t.ahpc";
    CHECK(run("synth --kind ar --seconds 0.5 --seed 6 --out " + wav) == 0);
    CHECK(run("encode " + wav + " " + stream.string() + " --predictor lpc" + fast) == 0);

    const auto bytes = slurp(stream);
    std::ofstream(stream, std::ios::binary)
        .write(bytes.data(), static_cast<std::streamsize>(bytes.size() - 3));

    const auto out_pcm = work_dir() / "t_out.wav";
    std::string out;
    CHECK(run("decode " + stream.string() + " " + out_pcm.string(), &out) == 1);
    CHECK(out.find("E_TRUNCATED") != std::string::npos);
    CHECK(!fs::exists(out_pcm)); // partial output suppressed
}

TEST_CASE("decode detects tunable drift via the digest") {
    const auto wav = (work_dir() / "d.wav").string();
    const auto stream = (work_dir() / "d.ahpc").string();
    CHECK(run("synth --kind ar --seconds 0.5 --seed 8 --out " + wav) == 0);
    CHECK(run("encode " + wav + " " + stream + fast) == 0);
    std::string out;
    CHECK(run("decode " + stream + " " + (work_dir() / "d_out.wav").string() +
                  " --epochs 3 --starts 2",
              &out) == 1);
    CHECK(out.find("E_DIGEST_MISMATCH") != std::string::npos);
}

TEST_CASE("eval writes per-file and aggregate rows") {
    const auto a = (work_dir() / "c0.wav").string();
    const auto b = (work_dir() / "c1.wav").string();
    CHECK(run("synth --kind ar --seconds 0.5 --seed 11 --out " + a) == 0);
    CHECK(run("synth --kind sat-ar --seconds 0.5 --seed 12 --out " + b) == 0);
    const auto manifest = work_dir() / "corpus.txt";
    std::ofstream(manifest) << "c0.wav,wav,16,a\nc1.wav,wav,16,b\n";

    const auto csv = work_dir() / "eval.csv";
    CHECK(run("eval --manifest " + manifest.string() + " --out " + csv.string() +
              " --predictors lpc,hybrid --nqs 4 --frame-lens 100" + fast) == 0);
    // header + 2 files x 2 configs + 2 aggregates x 2 configs
    CHECK(count_lines(csv) == 1 + 4 + 4);
}

TEST_CASE("sweep-framelen emits one row per length") {
    const auto wav = (work_dir() / "s.wav").string();
    CHECK(run("synth --kind voiced --seconds 0.5 --seed 13 --out " + wav) == 0);
    const auto csv = work_dir() / "sweep.csv";
    CHECK(run("sweep-framelen " + wav + " --out " + csv.string() +
              " --min-len 50 --max-len 150 --step 50 --nq 3" + fast) == 0);
    CHECK(count_lines(csv) == 1 + 3);
}

TEST_CASE("quant-config changes the digest and both ends must agree") {
    const auto wav = (work_dir() / "q.wav").string();
    const auto stream = (work_dir() / "q.ahpc").string();
    const auto cfg = work_dir() / "quant.json";
    std::ofstream(cfg) << R"({"step_max": 0.25})";

    CHECK(run("synth --kind ar --seconds 0.5 --seed 14 --out " + wav) == 0);
    CHECK(run("encode " + wav + " " + stream + " --quant-config " + cfg.string() + fast) == 0);

    std::string out;
    CHECK(run("decode " + stream + " " + (work_dir() / "q1.wav").string() + fast, &out) == 1);
    CHECK(out.find("E_DIGEST_MISMATCH") != std::string::npos);
    CHECK(run("decode " + stream + " " + (work_dir() / "q2.wav").string() + " --quant-config " +
              cfg.string() + fast) == 0);
}
