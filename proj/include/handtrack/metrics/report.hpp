#pragma once

#include <cmath>
#include <cstdio>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "handtrack/data/types.hpp"
#include "handtrack/metrics/mot.hpp"

namespace handtrack {

/// One report line. Percentages are on a 0-100 scale; absent values are
/// undefined for the slice (e.g. no ground truth).
struct EvalRow {
    std::string joint;
    std::optional<double> ap;
    std::optional<double> mota;
    std::optional<double> motp;
    double fn = 0.0;
    double fp = 0.0;
    double idsw = 0.0;
    std::optional<double> precision;
    std::optional<double> recall;
    std::optional<double> f1;
};

/// 21 joint rows, then the six group rows (wrist..pinky), then "total".
/// The total row's ap is the mAP.
struct EvalReport {
    std::string name;
    std::vector<EvalRow> rows;

    const EvalRow& total() const { return rows.back(); }
    const EvalRow* find(const std::string& joint) const {
        for (const auto& r : rows)
            if (r.joint == joint) return &r;
        return nullptr;
    }
    std::optional<double> map() const { return total().ap; }
};

inline constexpr int kReportRows = kNumJoints + 6 + 1;

namespace report_detail {

inline EvalRow row_from_events(std::string name, const JointEvents& e) {
    EvalRow r;
    r.joint = std::move(name);
    r.fn = static_cast<double>(e.fn);
    r.fp = static_cast<double>(e.fp);
    r.idsw = static_cast<double>(e.idsw);
    if (e.gt > 0) {
        r.mota = 100.0 * (1.0 - static_cast<double>(e.fn + e.fp + e.idsw) / static_cast<double>(e.gt));
        r.recall = 100.0 * static_cast<double>(e.matches) / static_cast<double>(e.matches + e.fn);
    }
    if (e.matches > 0) r.motp = 100.0 * e.motp_sum / static_cast<double>(e.matches);
    if (e.matches + e.fp > 0) r.precision = 100.0 * static_cast<double>(e.matches) / static_cast<double>(e.matches + e.fp);
    if (r.precision && r.recall)
        r.f1 = (*r.precision + *r.recall) > 0.0 ? 2.0 * *r.precision * *r.recall / (*r.precision + *r.recall) : 0.0;
    return r;
}

inline std::optional<double> mean_of(const std::vector<std::optional<double>>& xs) {
    double s = 0.0;
    int n = 0;
    for (const auto& x : xs)
        if (x) {
            s += *x;
            ++n;
        }
    if (n == 0) return std::nullopt;
    return s / n;
}

}  // namespace report_detail

/// MOTA = 100 (1 - (FN + FP + IDSW) / G); MOTP = 100 mean(1 - d_norm / sigma)
/// over matches; group and total rows pool events, their AP is the mean of
/// the member joints' AP.
inline EvalReport finalize(const MotEvents& events, std::string name = "") {
    EvalReport rep;
    rep.name = std::move(name);
    std::vector<std::optional<double>> aps;
    for (int j = 0; j < kNumJoints; ++j) {
        const auto& e = events.joints[j];
        EvalRow r = report_detail::row_from_events(std::string(kJointNames[j]), e);
        if (auto ap = average_precision(e.scored, e.gt)) r.ap = 100.0 * *ap;
        aps.push_back(r.ap);
        rep.rows.push_back(std::move(r));
    }
    for (int g = 0; g < 6; ++g) {
        JointEvents pooled;
        std::vector<std::optional<double>> group_aps;
        for (int j = 0; j < kNumJoints; ++j) {
            if (joint_group(j) != g) continue;
            const auto& e = events.joints[j];
            pooled.gt += e.gt;
            pooled.matches += e.matches;
            pooled.fn += e.fn;
            pooled.fp += e.fp;
            pooled.idsw += e.idsw;
            pooled.motp_sum += e.motp_sum;
            group_aps.push_back(aps[j]);
        }
        EvalRow r = report_detail::row_from_events(std::string(kJointGroups[g]), pooled);
        r.ap = report_detail::mean_of(group_aps);
        rep.rows.push_back(std::move(r));
    }
    JointEvents all;
    for (const auto& e : events.joints) {
        all.gt += e.gt;
        all.matches += e.matches;
        all.fn += e.fn;
        all.fp += e.fp;
        all.idsw += e.idsw;
        all.motp_sum += e.motp_sum;
    }
    EvalRow total = report_detail::row_from_events("total", all);
    total.ap = report_detail::mean_of(aps);
    rep.rows.push_back(std::move(total));
    return rep;
}

/// Unweighted mean of every metric across folds (absent values skipped).
inline EvalReport cross_fold_report(const std::vector<EvalReport>& folds, std::string name = "average") {
    if (folds.empty()) throw std::invalid_argument("cross_fold_report: no folds");
    EvalReport out;
    out.name = std::move(name);
    const std::size_t n_rows = folds.front().rows.size();
    for (std::size_t i = 0; i < n_rows; ++i) {
        EvalRow r;
        r.joint = folds.front().rows[i].joint;
        std::vector<std::optional<double>> ap, mota, motp, p, rc, f1;
        double fn = 0, fp = 0, idsw = 0;
        for (const auto& f : folds) {
            if (f.rows.size() != n_rows) throw std::invalid_argument("cross_fold_report: row layouts differ");
            const auto& x = f.rows[i];
            ap.push_back(x.ap);
            mota.push_back(x.mota);
            motp.push_back(x.motp);
            p.push_back(x.precision);
            rc.push_back(x.recall);
            f1.push_back(x.f1);
            fn += x.fn;
            fp += x.fp;
            idsw += x.idsw;
        }
        const double n = static_cast<double>(folds.size());
        r.ap = report_detail::mean_of(ap);
        r.mota = report_detail::mean_of(mota);
        r.motp = report_detail::mean_of(motp);
        r.precision = report_detail::mean_of(p);
        r.recall = report_detail::mean_of(rc);
        r.f1 = report_detail::mean_of(f1);
        r.fn = fn / n;
        r.fp = fp / n;
        r.idsw = idsw / n;
        out.rows.push_back(std::move(r));
    }
    return out;
}

inline const std::vector<std::string>& report_columns() {
    static const std::vector<std::string> cols = {"joint", "ap", "mota", "motp", "fn", "fp", "idsw", "precision", "recall", "f1"};
    return cols;
}

inline nlohmann::json report_to_json(const EvalReport& rep) {
    auto opt = [](const std::optional<double>& v) { return v ? nlohmann::json(*v) : nlohmann::json(nullptr); };
    auto rows = nlohmann::json::array();
    for (const auto& r : rep.rows)
        rows.push_back({{"joint", r.joint}, {"ap", opt(r.ap)}, {"mota", opt(r.mota)}, {"motp", opt(r.motp)},
                        {"fn", r.fn}, {"fp", r.fp}, {"idsw", r.idsw}, {"precision", opt(r.precision)},
                        {"recall", opt(r.recall)}, {"f1", opt(r.f1)}});
    return {{"name", rep.name}, {"rows", std::move(rows)}};
}

inline std::string format_number(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return buf;
}

inline std::string report_to_csv(const EvalReport& rep) {
    std::ostringstream os;
    const auto& cols = report_columns();
    for (std::size_t i = 0; i < cols.size(); ++i) os << (i ? "," : "") << cols[i];
    os << "\n";
    auto opt = [](const std::optional<double>& v) { return v ? format_number(*v) : std::string(); };
    for (const auto& r : rep.rows)
        os << r.joint << ',' << opt(r.ap) << ',' << opt(r.mota) << ',' << opt(r.motp) << ',' << format_number(r.fn)
           << ',' << format_number(r.fp) << ',' << format_number(r.idsw) << ',' << opt(r.precision) << ','
           << opt(r.recall) << ',' << opt(r.f1) << "\n";
    return os.str();
}

}  // namespace handtrack
