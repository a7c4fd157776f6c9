#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <vector>

#include "doctest.h"
#include "json.hpp"

#include "isoprefs/dataset.hpp"
#include "isoprefs/eval.hpp"
#include "isoprefs/range_image.hpp"

using namespace isoprefs;

namespace {

// The binary under test; the build injects its location.
const char* cli_path() { return ISOPREFS_CLI_PATH; }

struct CliResult {
    int exit_code = -1;
    std::string output; // stdout and stderr interleaved
};

CliResult run_cli(const std::string& args) {
    static int counter = 0;
    const std::string capture = "/tmp/isoprefs_cli_out_" + std::to_string(counter++) + ".txt";
    const std::string command = std::string(cli_path()) + " " + args + " > " + capture + " 2>&1";
    const int status = std::system(command.c_str());
    CliResult result;
    result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    std::ifstream in(capture);
    std::ostringstream text;
    text << in.rdbuf();
    result.output = text.str();
    std::remove(capture.c_str());
    return result;
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream text;
    text << in.rdbuf();
    return text.str();
}

} // namespace

TEST_SUITE("cli") {

TEST_CASE("generate writes a parsable dataset and reports a summary") {
    const auto run = run_cli("generate --kind star5 --seed 7 -o /tmp/cli_star5.csv");
    CHECK(run.exit_code == 0);
    CHECK(run.output.find("n=500 d=2") != std::string::npos);
    const LabeledDataset data = read_dataset_csv("/tmp/cli_star5.csv");
    CHECK(data.size() == 500);
    CHECK(data.dim() == 2);
}

TEST_CASE("missing required arguments exit with code two") {
    CHECK(run_cli("generate -o /tmp/cli_nokind.csv").exit_code == 2);
    CHECK(run_cli("score -i /tmp/cli_star5.csv -o /tmp/x.csv").exit_code == 2);
    CHECK(run_cli("nonsense").exit_code == 2);
}

TEST_CASE("score runs are reproducible for a fixed seed") {
    run_cli("generate --kind stair3 --seed 3 -o /tmp/cli_stair3.csv");
    const std::string cmd = "score -i /tmp/cli_stair3.csv --engine vifor --family line "
                            "--metric tanimoto --m-factor 5 --t 25 --psi 64 --b 2 --seed 9 -o ";
    CHECK(run_cli(cmd + "/tmp/cli_s1.csv").exit_code == 0);
    CHECK(run_cli(cmd + "/tmp/cli_s2.csv").exit_code == 0);
    const std::string first = slurp("/tmp/cli_s1.csv");
    CHECK(first == slurp("/tmp/cli_s2.csv"));
    CHECK(!first.empty());

    const std::string other = "score -i /tmp/cli_stair3.csv --engine vifor --family line "
                              "--metric tanimoto --m-factor 5 --t 25 --psi 64 --b 2 --seed 10 "
                              "-o /tmp/cli_s3.csv";
    CHECK(run_cli(other).exit_code == 0);
    CHECK(first != slurp("/tmp/cli_s3.csv"));
}

TEST_CASE("score maps data and config problems onto distinct exit codes") {
    CHECK(run_cli("score -i /tmp/cli_does_not_exist.csv --engine vifor -o /tmp/x.csv")
              .exit_code == 3);
    const auto bad = run_cli(
        "score -i /tmp/cli_stair3.csv --engine vifor --b 1 --m-factor 0 -o /tmp/x.csv");
    CHECK(bad.exit_code == 2);
    // Both problems are listed before the run aborts.
    CHECK(bad.output.find("--b must be in [2, 256]") != std::string::npos);
    CHECK(bad.output.find("--m-factor must be positive") != std::string::npos);
}

TEST_CASE("eval file mode prints the auc of the stored scores") {
    const std::string score_cmd =
        "score -i /tmp/cli_stair3.csv --engine rzhash --family line --m-factor 5 "
        "--t 25 --psi 64 --seed 4 -o /tmp/cli_rz.csv";
    CHECK(run_cli(score_cmd).exit_code == 0);
    const auto run = run_cli("eval --data /tmp/cli_stair3.csv --scores /tmp/cli_rz.csv");
    CHECK(run.exit_code == 0);

    const LabeledDataset data = read_dataset_csv("/tmp/cli_stair3.csv");
    const std::vector<double> scores = read_scores_csv("/tmp/cli_rz.csv");
    const std::string expected = "auc " + format_g9(roc_auc(scores, data.labels));
    CHECK(run.output.find(expected) != std::string::npos);
}

TEST_CASE("eval rejects misaligned score files") {
    run_cli("generate --kind star5 --seed 1 -o /tmp/cli_star5b.csv");
    CHECK(run_cli("eval --data /tmp/cli_star5b.csv --scores /tmp/cli_rz.csv").exit_code == 3);
}

TEST_CASE("eval engine mode reports mean and std over seeded runs") {
    const std::string cmd = "eval --data /tmp/cli_stair3.csv --engine rzhash --family line "
                            "--m-factor 5 --t 25 --psi 64 --runs 3 --seed 11 --json";
    const auto first = run_cli(cmd);
    CHECK(first.exit_code == 0);
    const auto parsed = nlohmann::json::parse(first.output);
    CHECK(parsed.at("runs") == 3);
    CHECK(parsed.at("aucs").size() == 3);
    const double mean = parsed.at("mean");
    CHECK(mean > 0.5);
    CHECK(mean <= 1.0);
    CHECK(parsed.at("std").get<double>() >= 0.0);
    // Same command, same seeds, same report.
    CHECK(run_cli(cmd).output == first.output);
}

TEST_CASE("online scoring round trips through the csv pipeline") {
    run_cli("generate --kind stream --n 3000 --d 4 --rate 0.02 --seed 6 -o /tmp/cli_stream.csv");
    const std::string cmd = "score -i /tmp/cli_stream.csv --engine online --tau 16 "
                            "--omega 512 --eta 32 --batch 64 --seed 2 -o /tmp/cli_online.csv";
    CHECK(run_cli(cmd).exit_code == 0);
    const std::vector<double> scores = read_scores_csv("/tmp/cli_online.csv");
    CHECK(scores.size() == 3000);
    for (const double s : scores) {
        CHECK(s > 0.0);
        CHECK(s <= 1.0);
    }
    const auto eval = run_cli("eval --data /tmp/cli_stream.csv --scores /tmp/cli_online.csv");
    CHECK(eval.exit_code == 0);
    CHECK(eval.output.rfind("auc ", 0) == 0);
}

TEST_CASE("sliding scoring writes a pixel map that eval can read back") {
    run_cli("generate --kind surface --shape plane --side 32 --sigma 0.01 --pit "
            "--pit-radius 4 --seed 5 -o /tmp/cli_grid.rimg");
    const std::string cmd = "score -i /tmp/cli_grid.rimg --engine sliding --omega 16 "
                            "--budget 2097152 --t 20 --psi 64 --seed 3 -o /tmp/cli_map.csv";
    CHECK(run_cli(cmd).exit_code == 0);

    const RangeImage image = read_range_image("/tmp/cli_grid.rimg");
    std::istringstream lines(slurp("/tmp/cli_map.csv"));
    std::string line;
    std::size_t rows = 0;
    while (std::getline(lines, line))
        if (!line.empty()) ++rows;
    CHECK(rows == image.pixels() + 1); // header plus one row per pixel

    const auto eval = run_cli("eval --data /tmp/cli_grid.rimg --scores /tmp/cli_map.csv");
    CHECK(eval.exit_code == 0);
    CHECK(eval.output.rfind("auc ", 0) == 0);
}

TEST_CASE("bench emits per-phase rows and honors the phase filter") {
    const auto sweep = run_cli("bench --engine rzhash -i /tmp/cli_stair3.csv --b-sweep 2,4 "
                               "--family line --m-factor 3 --t 10 --psi 32 --seed 1");
    CHECK(sweep.exit_code == 0);
    CHECK(sweep.output.find("engine,sweep,value,phase,wall_ms") != std::string::npos);
    for (const char* needle : {"rzhash,b,2,embed,", "rzhash,b,2,build,", "rzhash,b,2,score,",
                               "rzhash,b,4,embed,", "rzhash,b,4,build,", "rzhash,b,4,score,"})
        CHECK(sweep.output.find(needle) != std::string::npos);

    const auto filtered =
        run_cli("bench --engine online --n-sweep 1000,2000 --tau 8 --omega 256 --eta 32 "
                "--phases score --seed 1");
    CHECK(filtered.exit_code == 0);
    CHECK(filtered.output.find("online,n,1000,score,") != std::string::npos);
    CHECK(filtered.output.find("online,n,2000,score,") != std::string::npos);
    CHECK(filtered.output.find("build") == std::string::npos);

    CHECK(run_cli("bench --engine rzhash -i /tmp/cli_stair3.csv").exit_code == 2);
    CHECK(run_cli("bench --engine online --n-sweep 10 --b-sweep 2").exit_code == 2);
}

TEST_CASE("score appends one manifest line per run") {
    const std::string manifest = "/tmp/cli_manifest.jsonl";
    std::remove(manifest.c_str());
    const std::string cmd = "score -i /tmp/cli_stair3.csv --engine vifor --family line "
                            "--m-factor 3 --t 10 --psi 32 --seed 8 -o /tmp/cli_m.csv "
                            "--manifest " + manifest;
    CHECK(run_cli(cmd).exit_code == 0);
    CHECK(run_cli(cmd).exit_code == 0);

    std::ifstream in(manifest);
    std::string line;
    std::size_t lines = 0;
    while (std::getline(in, line)) {
        const auto parsed = nlohmann::json::parse(line);
        CHECK(parsed.at("cmd") == "score");
        CHECK(parsed.at("config").at("engine") == "vifor");
        CHECK(parsed.at("config").at("seed") == 8);
        CHECK(parsed.at("wall_ms").get<double>() > 0.0);
        CHECK(!parsed.at("depth_histogram").empty());
        ++lines;
    }
    CHECK(lines == 2);
}

} // TEST_SUITE
