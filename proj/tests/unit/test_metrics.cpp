#include <cmath>
#include <sstream>

#include <gtest/gtest.h>

#include "handtrack/metrics/mot.hpp"
#include "handtrack/metrics/pck.hpp"
#include "handtrack/metrics/report.hpp"
#include "oracles/mot_oracle.hpp"
#include "oracles/scenario.hpp"
#include "unit/helpers.hpp"

using namespace handtrack;
using testing_helpers::lattice_hand;

namespace {

HandInstance shifted(HandInstance h, double dx, double dy, std::string id) {
    for (auto& k : h.keypoints) {
        k.x += dx;
        k.y += dy;
    }
    h.track_id = std::move(id);
    return h;
}

ClipAnnotation clip_of(std::vector<std::vector<HandInstance>> frames) {
    ClipAnnotation c{"c", "v", 8.0, {}};
    for (std::size_t i = 0; i < frames.size(); ++i)
        c.frames.push_back({static_cast<std::int64_t>(i), 640, 480, std::move(frames[i])});
    return c;
}

}  // namespace

TEST(Pck, ThresholdBoundary) {
    const BBox box{0, 0, 100, 50};  // size 100 -> radius 10 at the defaults
    const MatchThreshold thr;
    EXPECT_DOUBLE_EQ(thr.radius(box), 10.0);
    EXPECT_TRUE(pck_correct({9.9, 0}, {0, 0}, box, thr));
    EXPECT_FALSE(pck_correct({10.1, 0}, {0, 0}, box, thr));
    EXPECT_FALSE(pck_correct({10.0, 0}, {0, 0}, box, thr));
    EXPECT_TRUE(pck_correct({6, 7.9}, {0, 0}, box, thr));
}

TEST(Pck, TranslationInvariant) {
    const HandInstance g = lattice_hand(10, 10, 80, "a");
    const HandInstance p = shifted(g, 3, -4, "p");
    EvalOptions opt;
    EXPECT_DOUBLE_EQ(pose_pck(p, g, opt), 1.0);
    HandInstance g2 = lattice_hand(310, 210, 80, "a");
    EXPECT_DOUBLE_EQ(pose_pck(shifted(g2, 3, -4, "p"), g2, opt), pose_pck(p, g, opt));
}

TEST(Pck, VisibilityRules) {
    HandInstance g = lattice_hand(0, 0, 100, "a");
    HandInstance p = shifted(g, 0, 0, "p");
    g.keypoints[0].vis = Visibility::Occluded;
    g.keypoints[1].vis = Visibility::NotAvailable;
    EvalOptions opt;
    EXPECT_DOUBLE_EQ(pose_pck(p, g, opt), 1.0);
    p.keypoints[0].vis = Visibility::NotAvailable;
    EXPECT_DOUBLE_EQ(pose_pck(p, g, opt), 19.0 / 20.0);
    opt.occluded_counts = false;
    EXPECT_DOUBLE_EQ(pose_pck(p, g, opt), 1.0);
    std::array<double, kNumJoints> s{};
    s.fill(0.9);
    s[2] = 0.1;
    p.keypoint_scores = s;
    opt.min_joint_confidence = 0.5;
    EXPECT_DOUBLE_EQ(pose_pck(p, g, opt), 18.0 / 19.0);
}

TEST(AssignPoses, PicksHighestPckFirst) {
    const HandInstance g0 = lattice_hand(0, 0, 100, "a");
    const HandInstance g1 = lattice_hand(30, 0, 100, "b");
    // p0 sits on g1 exactly, p1 is near both but better on g0
    const std::vector<HandInstance> preds{shifted(g1, 0, 0, "x"), shifted(g0, 4, 0, "y")};
    const auto a = assign_poses(preds, {g0, g1}, {});
    EXPECT_EQ(a.pred_to_gt[0], 1);
    EXPECT_EQ(a.pred_to_gt[1], 0);
    EXPECT_EQ(a.gt_to_pred[0], 1);
}

TEST(AssignPoses, ZeroPckNeverAssigned) {
    const auto a = assign_poses({lattice_hand(400, 400, 50, "x")}, {lattice_hand(0, 0, 50, "a")}, {});
    EXPECT_EQ(a.pred_to_gt[0], -1);
    EXPECT_EQ(a.gt_to_pred[0], -1);
}

TEST(AssignPoses, TiesGoToLowerPrediction) {
    const HandInstance g = lattice_hand(0, 0, 100, "a");
    const auto a = assign_poses({shifted(g, 1, 0, "x"), shifted(g, 1, 0, "y")}, {g}, {});
    EXPECT_EQ(a.pred_to_gt[0], 0);
    EXPECT_EQ(a.pred_to_gt[1], -1);
}

TEST(AveragePrecision, Examples) {
    EXPECT_NEAR(*average_precision({{0.9, true}, {0.8, false}, {0.7, true}}, 2), 0.8333333333333333, 1e-12);
    EXPECT_NEAR(*average_precision({{0.9, true}, {0.8, false}, {0.7, true}}, 3), 5.0 / 9.0, 1e-12);
    EXPECT_DOUBLE_EQ(*average_precision({{0.5, true}, {0.4, true}}, 2), 1.0);
    EXPECT_DOUBLE_EQ(*average_precision({}, 4), 0.0);
    EXPECT_FALSE(average_precision({{0.5, false}}, 0).has_value());
    // ties keep input order
    EXPECT_DOUBLE_EQ(*average_precision({{0.5, false}, {0.5, true}}, 1), 0.5);
    EXPECT_DOUBLE_EQ(*average_precision({{0.5, true}, {0.5, false}}, 1), 1.0);
}

TEST(AveragePrecision, RaisingATruePositiveNeverHurts) {
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 200; ++i) {
        std::vector<ScoredJoint> s;
        for (int k = 0; k < 12; ++k) s.push_back({u(rng), u(rng) < 0.5});
        const double before = *average_precision(s, 15);
        for (auto& x : s)
            if (x.true_positive) {
                x.confidence = 2.0;
                break;
            }
        EXPECT_GE(*average_precision(s, 15) + 1e-12, before);
    }
}

TEST(Mota, FormulaExample) {
    JointEvents e;
    e.gt = 10;
    e.matches = 8;
    e.fn = 2;
    e.fp = 1;
    e.idsw = 1;
    MotEvents ev;
    ev.joints[0] = e;
    const auto rep = finalize(ev);
    EXPECT_DOUBLE_EQ(*rep.rows[0].mota, 60.0);
    EXPECT_DOUBLE_EQ(*rep.rows[0].recall, 80.0);
    EXPECT_NEAR(*rep.rows[0].precision, 800.0 / 9.0, 1e-12);
    EXPECT_FALSE(rep.rows[1].mota.has_value());
}

TEST(Mota, FalsePositiveFloodGoesNegative) {
    const HandInstance g = lattice_hand(0, 0, 100, "a");
    std::vector<HandInstance> preds{shifted(g, 0, 0, "1")};
    for (int k = 0; k < 3; ++k) preds.push_back(lattice_hand(300 + 60 * k, 300, 50, "f" + std::to_string(k)));
    const auto pred = clip_of({preds});
    const auto rep = finalize(evaluate_clip(clip_of({{g}}), &pred, {}));
    EXPECT_DOUBLE_EQ(*rep.total().mota, -200.0);
}

TEST(Mot, PerfectPredictionScoresHundred) {
    const auto gt = clip_of({{lattice_hand(0, 0, 100, "a"), lattice_hand(200, 0, 100, "b")},
                             {lattice_hand(2, 0, 100, "a"), lattice_hand(202, 0, 100, "b")}});
    const auto rep = finalize(evaluate_clip(gt, &gt, {}));
    EXPECT_DOUBLE_EQ(*rep.map(), 100.0);
    EXPECT_DOUBLE_EQ(*rep.total().mota, 100.0);
    EXPECT_DOUBLE_EQ(*rep.total().motp, 100.0);
    EXPECT_EQ(rep.total().idsw, 0.0);
}

TEST(Mot, SwapAndSwapBackCountsFourSwitchesPerJoint) {
    const HandInstance a = lattice_hand(0, 0, 100, "a"), b = lattice_hand(200, 0, 100, "b");
    const auto gt = clip_of({{a, b}, {a, b}, {a, b}});
    const auto pred = clip_of({{shifted(a, 0, 0, "1"), shifted(b, 0, 0, "2")},
                               {shifted(a, 0, 0, "2"), shifted(b, 0, 0, "1")},
                               {shifted(a, 0, 0, "1"), shifted(b, 0, 0, "2")}});
    const auto ev = evaluate_clip(gt, &pred, {});
    for (const auto& j : ev.joints) EXPECT_EQ(j.idsw, 4u);
    EXPECT_DOUBLE_EQ(finalize(ev).total().idsw, 4.0 * kNumJoints);
}

TEST(Mot, MemoryResetsWhenGroundTruthLeaves) {
    const HandInstance a = lattice_hand(0, 0, 100, "a");
    const auto gt = clip_of({{a}, {}, {a}});
    const auto pred = clip_of({{shifted(a, 0, 0, "1")}, {}, {shifted(a, 0, 0, "2")}});
    EXPECT_EQ(finalize(evaluate_clip(gt, &pred, {})).total().idsw, 0.0);
}

TEST(Mot, DroppedHandAddsFalseNegatives) {
    const HandInstance a = lattice_hand(0, 0, 100, "a"), b = lattice_hand(200, 0, 100, "b");
    const auto gt = clip_of({{a, b}});
    const auto full = evaluate_clip(gt, &gt, {});
    const auto pred = clip_of({{a}});
    const auto dropped = evaluate_clip(gt, &pred, {});
    std::size_t fn_full = 0, fn_dropped = 0;
    for (int j = 0; j < kNumJoints; ++j) {
        fn_full += full.joints[j].fn;
        fn_dropped += dropped.joints[j].fn;
    }
    EXPECT_EQ(fn_dropped, fn_full + kNumJoints);
}

TEST(Mot, FramesMustIncrease) {
    MotAccumulator acc({});
    acc.add_frame(3, {}, {});
    EXPECT_THROW(acc.add_frame(3, {}, {}), DataError);
    EXPECT_THROW(acc.add_frame(1, {}, {}), DataError);
}

TEST(Mot, PredictedFrameWithoutGroundTruthThrows) {
    const auto gt = clip_of({{lattice_hand(0, 0, 100, "a")}});
    auto pred = gt;
    pred.frames[0].frame_id = 9;
    EXPECT_THROW(evaluate_clip(gt, &pred, {}), DataError);
}

TEST(Mot, MissingPredictionClipIsAllFalseNegatives) {
    const auto gt = clip_of({{lattice_hand(0, 0, 100, "a")}});
    const auto rep = finalize(evaluate_clip(gt, nullptr, {}));
    EXPECT_DOUBLE_EQ(*rep.total().recall, 0.0);
    EXPECT_DOUBLE_EQ(*rep.map(), 0.0);
    EXPECT_FALSE(rep.total().precision.has_value());
}

TEST(Mot, RandomScenariosMatchOracle) {
    for (std::uint64_t seed = 0; seed < 150; ++seed) {
        const auto s = oracle::random_scenario(seed);
        const auto ev = evaluate_clip(s.gt, &s.pred, s.opt);
        const auto ref = oracle::count_clip(s.gt, s.pred, s.opt);
        for (int j = 0; j < kNumJoints; ++j) {
            const auto& a = ev.joints[j];
            const auto& b = ref[j];
            ASSERT_EQ(static_cast<long>(a.gt), b.gt) << seed;
            EXPECT_EQ(static_cast<long>(a.matches), b.matches) << seed;
            EXPECT_EQ(static_cast<long>(a.fn), b.fn) << seed;
            EXPECT_EQ(static_cast<long>(a.fp), b.fp) << seed;
            EXPECT_EQ(static_cast<long>(a.idsw), b.idsw) << seed << " joint " << j;
            EXPECT_NEAR(a.motp_sum, b.motp_sum, 1e-9) << seed;
            const auto ap = average_precision(a.scored, a.gt);
            const auto ap_ref = oracle::average_precision(b.scored, b.gt);
            ASSERT_EQ(ap.has_value(), ap_ref.has_value());
            if (ap) EXPECT_NEAR(*ap, *ap_ref, 1e-9) << seed;
        }
        const auto rep = finalize(ev);
        const auto tot = oracle::pooled(ref);
        if (tot.gt > 0) EXPECT_NEAR(*rep.total().mota, oracle::mota(tot), 1e-9);
    }
}

TEST(Report, RowLayout) {
    const auto rep = finalize(MotEvents{});
    ASSERT_EQ(rep.rows.size(), static_cast<std::size_t>(kReportRows));
    EXPECT_EQ(rep.rows.size(), 28u);
    EXPECT_EQ(rep.rows[0].joint, "wrist");
    EXPECT_EQ(rep.rows[20].joint, "pinky_tip");
    EXPECT_EQ(rep.rows[21].joint, "wrist");
    EXPECT_EQ(rep.rows[26].joint, "pinky");
    EXPECT_EQ(rep.rows[27].joint, "total");
}

TEST(Report, GroupAndTotalAggregation) {
    MotEvents ev;
    for (int j = 0; j < kNumJoints; ++j) {
        auto& e = ev.joints[j];
        e.gt = 10;
        e.matches = j % 2 ? 10 : 5;
        e.fn = e.gt - e.matches;
        for (std::size_t k = 0; k < e.matches; ++k) e.scored.push_back({0.9, true});
    }
    const auto rep = finalize(ev);
    // thumb: joints 1..4 -> matches 10, 5, 10, 5
    const auto* thumb = rep.find("thumb");
    ASSERT_NE(thumb, nullptr);
    EXPECT_DOUBLE_EQ(*thumb->recall, 75.0);
    EXPECT_DOUBLE_EQ(*thumb->ap, 75.0);
    EXPECT_DOUBLE_EQ(*rep.find("wrist")->ap, 50.0);
    EXPECT_NEAR(*rep.map(), (10 * 100.0 + 11 * 50.0) / 21.0, 1e-9);
}

TEST(CrossFold, MeansMetricsAcrossFolds) {
    EvalReport a, b;
    a.rows.push_back({"total", 40.0, 30.0, 80.0, 2, 4, 6, 90.0, std::nullopt, std::nullopt});
    b.rows.push_back({"total", 60.0, 50.0, std::nullopt, 4, 0, 0, 70.0, 50.0, std::nullopt});
    const auto avg = cross_fold_report({a, b});
    EXPECT_DOUBLE_EQ(*avg.rows[0].mota, 40.0);
    EXPECT_DOUBLE_EQ(*avg.rows[0].ap, 50.0);
    EXPECT_DOUBLE_EQ(*avg.rows[0].motp, 80.0);
    EXPECT_DOUBLE_EQ(*avg.rows[0].recall, 50.0);
    EXPECT_FALSE(avg.rows[0].f1.has_value());
    EXPECT_DOUBLE_EQ(avg.rows[0].fn, 3.0);
    EXPECT_EQ(avg.name, "average");
    EXPECT_THROW(cross_fold_report({}), std::invalid_argument);
}

TEST(CrossFold, IdenticalFoldsReproduceTheFold) {
    const auto s = oracle::random_scenario(3);
    const auto rep = finalize(evaluate_clip(s.gt, &s.pred, s.opt));
    const auto avg = cross_fold_report({rep, rep, rep});
    for (std::size_t i = 0; i < rep.rows.size(); ++i) {
        EXPECT_EQ(avg.rows[i].mota.has_value(), rep.rows[i].mota.has_value());
        if (rep.rows[i].mota) EXPECT_NEAR(*avg.rows[i].mota, *rep.rows[i].mota, 1e-9);
        if (rep.rows[i].ap) EXPECT_NEAR(*avg.rows[i].ap, *rep.rows[i].ap, 1e-9);
        EXPECT_NEAR(avg.rows[i].fp, rep.rows[i].fp, 1e-9);
    }
}

TEST(Report, CsvAndJsonColumns) {
    const auto gt = clip_of({{lattice_hand(0, 0, 100, "a")}});
    const auto rep = finalize(evaluate_clip(gt, &gt, {}), "fold_0");
    const std::string csv = report_to_csv(rep);
    std::istringstream is(csv);
    std::string header;
    std::getline(is, header);
    EXPECT_EQ(header, "joint,ap,mota,motp,fn,fp,idsw,precision,recall,f1");
    int lines = 0;
    for (std::string l; std::getline(is, l);) ++lines;
    EXPECT_EQ(lines, 28);
    const auto j = report_to_json(rep);
    EXPECT_EQ(j["name"], "fold_0");
    ASSERT_EQ(j["rows"].size(), 28u);
    EXPECT_DOUBLE_EQ(j["rows"][27]["mota"].get<double>(), 100.0);
    EXPECT_TRUE(j["rows"][27].contains("f1"));
}
