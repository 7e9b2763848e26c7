#include "gdyn/metrics/report.hpp"

#include "gdyn/core/errors.hpp"
#include "gdyn/metrics/distance.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

namespace gdyn {

MetricSummary MetricReport::summarize(const std::vector<double>& series) const
{
    MetricSummary s;
    if (series.empty()) return s;
    for (double v : series) {
        s.mean += v;
        s.max = std::max(s.max, v);
    }
    s.mean /= static_cast<double>(series.size());
    double var = 0.0;
    for (double v : series) var += (v - s.mean) * (v - s.mean);
    s.stddev = std::sqrt(var / static_cast<double>(series.size()));
    return s;
}

std::string MetricReport::to_csv() const
{
    std::string out = "frame,time,cd_s2r,cd_r2s,hd_s2r,hd_r2s\n";
    char buf[256];
    for (int f = 0; f < frame_count(); ++f) {
        std::snprintf(buf, sizeof(buf), "%d,%.9g,%.9g,%.9g,%.9g,%.9g\n", f, time[f], cd_s2r[f],
                      cd_r2s[f], hd_s2r[f], hd_r2s[f]);
        out += buf;
    }
    return out;
}

std::string MetricReport::summary_json() const
{
    auto block = [&](const std::vector<double>& series) {
        const MetricSummary s = summarize(series);
        return nlohmann::json{{"mean", s.mean}, {"std", s.stddev}, {"max", s.max}};
    };
    nlohmann::json j{{"frames", frame_count()},
                     {"cd_s2r", block(cd_s2r)},
                     {"cd_r2s", block(cd_r2s)},
                     {"hd_s2r", block(hd_s2r)},
                     {"hd_r2s", block(hd_r2s)}};
    return j.dump(2) + "\n";
}

std::vector<PointCloudFrame> compensate_delay(const std::vector<PointCloudFrame>& frames,
                                              double delay)
{
    std::vector<PointCloudFrame> out;
    out.reserve(frames.size());
    for (const PointCloudFrame& f : frames) {
        if (f.timestamp - delay < 0) continue;
        PointCloudFrame shifted = f;
        shifted.timestamp -= delay;
        out.push_back(std::move(shifted));
    }
    return out;
}

MetricReport evaluate(const std::vector<MeshFrame>& sim, const std::vector<PointCloudFrame>& real,
                      const RigidTransform& alignment, double delay)
{
    const std::vector<PointCloudFrame> shifted = compensate_delay(real, delay);

    double half_period = std::numeric_limits<double>::infinity();
    if (sim.size() >= 2) half_period = 0.5 * (sim[1].time - sim[0].time);

    MetricReport report;
    std::vector<Vec3> moved;
    for (const MeshFrame& frame : sim) {
        // nearest real frame by timestamp
        int best = -1;
        double best_dt = std::numeric_limits<double>::infinity();
        for (size_t r = 0; r < shifted.size(); ++r) {
            const double dt = std::abs(shifted[r].timestamp - frame.time);
            if (dt < best_dt) {
                best_dt = dt;
                best = static_cast<int>(r);
            }
        }
        if (best < 0 || best_dt > half_period + 1e-12) continue;
        if (shifted[best].points.empty() || frame.vertices.empty()) continue;

        moved.resize(frame.vertices.size());
        for (size_t i = 0; i < frame.vertices.size(); ++i)
            moved[i] = alignment.apply(frame.vertices[i]);

        const PairMetrics m = metrics_between(moved, shifted[best].points);
        report.time.push_back(frame.time);
        report.cd_s2r.push_back(m.cd_s2r);
        report.cd_r2s.push_back(m.cd_r2s);
        report.hd_s2r.push_back(m.hd_s2r);
        report.hd_r2s.push_back(m.hd_r2s);
    }
    if (report.frame_count() == 0)
        throw NoOverlap("no sim frames matched the ground-truth stream");
    return report;
}

} // namespace gdyn
