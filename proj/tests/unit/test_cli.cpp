#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>

#include <gtest/gtest.h>
#include <json.hpp>

#include "handtrack/data/json_io.hpp"
#include "handtrack/heatmap/cphm.hpp"
#include "handtrack/heatmap/heatmap.hpp"

namespace fs = std::filesystem;
using namespace handtrack;

namespace {

int run(const std::string& args, const std::string& env = "") {
    const std::string cmd = env + " " + std::string(HANDTRACK_CLI) + " " + args + " >/dev/null 2>&1";
    const int rc = std::system(cmd.c_str());
    return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

nlohmann::json total_row(const fs::path& report_json) {
    return nlohmann::json::parse(slurp(report_json))["rows"].back();
}

class Cli : public ::testing::Test {
protected:
    void SetUp() override {
        std::random_device rd;
        dir = fs::temp_directory_path() / ("handtrack_cli_" + std::to_string(rd()));
        fs::create_directories(dir);
        ASSERT_EQ(run("synth --out " + p("d") + " --clips 3 --videos 2 --frames 8 --hands 2 --seed 4"), 0);
    }
    void TearDown() override { fs::remove_all(dir); }

    std::string p(const std::string& rel) const { return (dir / rel).string(); }
    std::string gt() const { return p("d/gt.json"); }
    std::string dets() const { return p("d/detections.json"); }

    // out_res 16 keeps the conditional branches cheap
    static constexpr const char* kFast = " --out-res 16 --in-res 64 --copy-weights --stub-predictor";

    fs::path dir;
};

}  // namespace

TEST_F(Cli, SynthTrackEvalSmoke) {
    ASSERT_TRUE(fs::exists(gt()));
    ASSERT_TRUE(fs::exists(p("d/manifest.json")));
    ASSERT_EQ(run("validate " + gt()), 0);
    ASSERT_EQ(run("track --detections " + dets() + " --out " + p("t") + kFast), 0);
    ASSERT_TRUE(fs::exists(p("t/tracks.json")));
    ASSERT_EQ(run("validate " + p("t/tracks.json")), 0);
    ASSERT_EQ(run("eval --gt " + gt() + " --tracks " + p("t/tracks.json") + " --out " + p("e")), 0);
    for (const char* f : {"fold_0.json", "fold_1.json", "fold_0.csv", "average.json", "average.csv", "summary.csv"})
        EXPECT_TRUE(fs::exists(dir / "e" / f)) << f;
    EXPECT_FALSE(fs::exists(dir / "e" / "fold_2.json"));
    const auto total = total_row(dir / "e" / "average.json");
    EXPECT_EQ(total["joint"], "total");
    EXPECT_GT(total["mota"].get<double>(), 90.0);

    const auto m = nlohmann::json::parse(slurp(dir / "t" / "manifest.json"));
    EXPECT_EQ(m["command"], "track");
    EXPECT_EQ(m["config"]["delta"], 3);
    EXPECT_EQ(m["config"]["out_res"], 16);
    EXPECT_EQ(m["inputs"][0]["role"], "detections");
    EXPECT_EQ(m["inputs"][0]["sha256"].get<std::string>().size(), 64u);

    // every output hand names its track and the prior it was conditioned on
    const auto tracks = nlohmann::json::parse(slurp(dir / "t" / "tracks.json"));
    const auto& hand = tracks["clips"][0]["frames"][1]["hands"][0];
    EXPECT_FALSE(hand["track_id"].get<std::string>().empty());
    EXPECT_TRUE(hand.contains("matched_prior"));
}

TEST_F(Cli, GroundTruthAgainstItselfScoresHundred) {
    ASSERT_EQ(run("eval --gt " + gt() + " --tracks " + gt() + " --out " + p("e")), 0);
    const auto total = total_row(dir / "e" / "average.json");
    EXPECT_DOUBLE_EQ(total["ap"].get<double>(), 100.0);
    EXPECT_DOUBLE_EQ(total["mota"].get<double>(), 100.0);
    EXPECT_DOUBLE_EQ(total["recall"].get<double>(), 100.0);
    EXPECT_DOUBLE_EQ(total["idsw"].get<double>(), 0.0);
}

TEST_F(Cli, EmptyTracksHaveZeroRecall) {
    Dataset ds = parse_dataset(gt());
    for (auto& c : ds.clips)
        for (auto& f : c.frames) f.hands.clear();
    write_dataset(dir / "empty.json", ds);
    ASSERT_EQ(run("eval --gt " + gt() + " --tracks " + p("empty.json") + " --out " + p("e")), 0);
    const auto total = total_row(dir / "e" / "average.json");
    EXPECT_DOUBLE_EQ(total["recall"].get<double>(), 0.0);
    EXPECT_DOUBLE_EQ(total["ap"].get<double>(), 0.0);
    EXPECT_TRUE(total["precision"].is_null());
}

TEST_F(Cli, UnmatchedClipIsADataError) {
    Dataset ds = parse_dataset(gt());
    ds.clips.back().clip_id = "nowhere";
    write_dataset(dir / "odd.json", ds);
    EXPECT_EQ(run("eval --gt " + gt() + " --tracks " + p("odd.json") + " --out " + p("e")), 3);
    ds.clips.pop_back();
    write_dataset(dir / "short.json", ds);
    EXPECT_EQ(run("eval --gt " + gt() + " --tracks " + p("short.json") + " --out " + p("e")), 3);
}

TEST_F(Cli, GcnWithoutWeightsIsAConfigError) {
    EXPECT_EQ(run("track --detections " + dets() + " --out " + p("t") + " --strategy gcn" + kFast), 2);
    EXPECT_EQ(run("track --detections " + dets() + " --out " + p("t") + " --strategy bogus" + kFast), 2);
    EXPECT_EQ(run("track --detections " + dets() + " --out " + p("t") + " --delta 0" + kFast), 2);
    EXPECT_EQ(run("track --detections " + dets() + " --out " + p("t") + " --stub-predictor"), 2);  // no weights flag
    EXPECT_EQ(run("track --detections " + dets() + " --out " + p("t") + " --bogus-flag"), 2);
}

TEST_F(Cli, GcnStrategyWithFittedWeights) {
    ASSERT_EQ(run("fit-gcn --dataset " + gt() + " --out " + p("gcn.json") + " --epochs 2 --pairs-per-epoch 64"), 0);
    EXPECT_EQ(run("track --detections " + dets() + " --out " + p("t") + " --strategy gcn --gcn-weights " +
                  p("gcn.json") + kFast),
              0);
    EXPECT_TRUE(fs::exists(dir / "t" / "tracks.json"));
    EXPECT_EQ(run("fit-gcn --dataset " + gt() + " --out " + p("gcn.json") + " --channels 5"), 2);
}

TEST_F(Cli, MissingCphmRecordIsADataError) {
    const Dataset ds = parse_dataset(dets());
    fs::create_directories(dir / "cphm");
    for (const auto& clip : ds.clips) {
        CphmFile file;
        for (const auto& f : clip.frames)
            for (std::size_t d = 0; d < f.hands.size(); ++d) {
                const auto key = CphmKey{static_cast<std::uint32_t>(f.frame_id), static_cast<std::uint32_t>(d)};
                file[key] = {key.first, key.second, Tensor3(kNumJoints, 16, 16), Tensor3(kFeatureChannels, 16, 16)};
            }
        write_cphm(dir / "cphm" / (clip.clip_id + ".cphm"), file);
    }
    const std::string base = "track --detections " + dets() + " --out " + p("t") + " --out-res 16 --copy-weights --cphm " + p("cphm");
    EXPECT_EQ(run(base), 0);
    CphmFile partial = read_cphm(dir / "cphm" / (ds.clips[0].clip_id + ".cphm"));
    partial.erase(std::prev(partial.end()));
    write_cphm(dir / "cphm" / (ds.clips[0].clip_id + ".cphm"), partial);
    EXPECT_EQ(run(base), 3);
    EXPECT_EQ(run("track --detections " + dets() + " --out " + p("t") + " --copy-weights --cphm " + p("cphm")), 3);  // 64 vs 16
}

TEST_F(Cli, SchemaErrorExitCode) {
    std::ofstream(dir / "bad.json") << "{\"clips\": [ {\"clip_id\": 3} ]}";
    EXPECT_EQ(run("eval --gt " + p("bad.json") + " --tracks " + gt() + " --out " + p("e")), 2);
    EXPECT_EQ(run("validate " + p("bad.json")), 2);
    EXPECT_EQ(run("eval --gt " + p("missing.json") + " --tracks " + gt() + " --out " + p("e")), 3);
}

TEST_F(Cli, JobsDoNotChangeOutputs) {
    ASSERT_EQ(run("track --detections " + dets() + " --out " + p("t1") + kFast + " --jobs 1"), 0);
    ASSERT_EQ(run("track --detections " + dets() + " --out " + p("t4") + kFast + " --jobs 4"), 0);
    EXPECT_EQ(slurp(dir / "t1" / "tracks.json"), slurp(dir / "t4" / "tracks.json"));
    EXPECT_EQ(slurp(dir / "t1" / "manifest.json"), slurp(dir / "t4" / "manifest.json"));
    ASSERT_EQ(run("eval --gt " + gt() + " --tracks " + p("t1/tracks.json") + " --out " + p("e1") + " --jobs 1"), 0);
    ASSERT_EQ(run("eval --gt " + gt() + " --tracks " + p("t1/tracks.json") + " --out " + p("e3"), "HANDTRACK_JOBS=3"), 0);
    for (const auto& e : fs::directory_iterator(dir / "e1")) {
        if (e.path().filename() == "manifest.json") continue;
        EXPECT_EQ(slurp(e.path()), slurp(dir / "e3" / e.path().filename())) << e.path();
    }
}

TEST_F(Cli, BadJobsSettings) {
    EXPECT_EQ(run("eval --gt " + gt() + " --tracks " + gt() + " --out " + p("e"), "HANDTRACK_JOBS=zero"), 2);
    EXPECT_EQ(run("eval --gt " + gt() + " --tracks " + gt() + " --out " + p("e") + " --jobs 0"), 2);
}

TEST_F(Cli, ConfigFromManifestReproducesRun) {
    ASSERT_EQ(run("track --detections " + dets() + " --out " + p("t1") + kFast + " --delta 2 --min-sim 0.4"), 0);
    ASSERT_EQ(run("track --detections " + dets() + " --out " + p("t2") + " --copy-weights --stub-predictor --config-from " +
                  p("t1/manifest.json")),
              0);
    EXPECT_EQ(slurp(dir / "t1" / "tracks.json"), slurp(dir / "t2" / "tracks.json"));
    EXPECT_EQ(nlohmann::json::parse(slurp(dir / "t2" / "manifest.json"))["config"]["delta"], 2);
    EXPECT_EQ(run("track --detections " + dets() + " --out " + p("t3") + " --copy-weights --stub-predictor --delta 4 --config-from " +
                  p("t1/manifest.json")),
              2);
}

TEST_F(Cli, SingleCellSweepMatchesSingleRun) {
    ASSERT_EQ(run("sweep --gt " + gt() + " --detections " + dets() + " --out " + p("s") + kFast +
                  " --strategies l2 --min-sims 0.01 --peak-thresholds 0.2"),
              0);
    ASSERT_EQ(run("track --detections " + dets() + " --out " + p("t") + kFast + " --strategy l2 --min-sim 0.01"), 0);
    ASSERT_EQ(run("eval --gt " + gt() + " --tracks " + p("t/tracks.json") + " --out " + p("e")), 0);
    std::istringstream board(slurp(dir / "s" / "leaderboard.csv"));
    std::string header, row;
    std::getline(board, header);
    std::getline(board, row);
    EXPECT_EQ(header, "rank,strategy,min_sim,peak_threshold,map,mota,motp,precision,recall,f1,idsw");
    std::istringstream summary(slurp(dir / "e" / "summary.csv"));
    std::string line, avg;
    while (std::getline(summary, line)) {
        if (line.rfind("average,", 0) == 0) avg = line;
    }
    // summary: fold,video_id,map,mota,...; leaderboard: rank,strategy,min_sim,peak,map,mota,...
    auto fields = [](const std::string& s) {
        std::vector<std::string> out;
        std::stringstream ss(s);
        for (std::string f; std::getline(ss, f, ',');) out.push_back(f);
        return out;
    };
    const auto b = fields(row), a = fields(avg);
    ASSERT_GE(b.size(), 6u);
    ASSERT_GE(a.size(), 4u);
    EXPECT_EQ(b[4], a[2]);  // map
    EXPECT_EQ(b[5], a[3]);  // mota
}

TEST_F(Cli, SweepLeaderboardIsSorted) {
    ASSERT_EQ(run("sweep --gt " + gt() + " --detections " + dets() + " --out " + p("s") + kFast +
                  " --strategies iou,l2 --min-sims 0.1,0.9 --peak-thresholds 0.2"),
              0);
    std::istringstream board(slurp(dir / "s" / "leaderboard.csv"));
    std::string line;
    std::getline(board, line);
    std::vector<double> mota;
    while (std::getline(board, line)) {
        std::stringstream ss(line);
        std::string f;
        for (int i = 0; i < 6; ++i) std::getline(ss, f, ',');
        mota.push_back(std::stod(f));
    }
    ASSERT_EQ(mota.size(), 4u);
    EXPECT_TRUE(std::is_sorted(mota.rbegin(), mota.rend()));
    EXPECT_EQ(run("sweep --gt " + gt() + " --detections " + dets() + " --out " + p("s") + kFast + " --min-sims 0.1,x"), 2);
}

TEST_F(Cli, ReportCommands) {
    EXPECT_EQ(run("report --dataset " + gt()), 0);
    ASSERT_EQ(run("eval --gt " + gt() + " --tracks " + gt() + " --out " + p("e")), 0);
    EXPECT_EQ(run("report --eval " + p("e")), 0);
    EXPECT_EQ(run("report"), 2);
}
