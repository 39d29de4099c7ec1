#include "shard_sched/metrics.hpp"

#include <algorithm>

namespace shard_sched {

GrowthResult detect_growth(std::span<const double> series, double slope_threshold, double r2_threshold) {
    GrowthResult out;
    const std::size_t n = series.size();
    const std::size_t first = n / 2;
    const std::size_t m = n - first;
    if (m < 2) return out;
    double sx = 0, sy = 0;
    for (std::size_t i = first; i < n; ++i) {
        sx += static_cast<double>(i);
        sy += series[i];
    }
    const double mx = sx / static_cast<double>(m);
    const double my = sy / static_cast<double>(m);
    double sxx = 0, sxy = 0, syy = 0;
    for (std::size_t i = first; i < n; ++i) {
        const double dx = static_cast<double>(i) - mx;
        const double dy = series[i] - my;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    out.slope = sxy / sxx;
    // constant series: no trend to explain
    out.r2 = syy > 0 ? (sxy * sxy) / (sxx * syy) : 0.0;
    out.growing = out.slope > slope_threshold && out.r2 > r2_threshold;
    return out;
}

GrowthResult detect_growth(const MetricsTrace& trace, double slope_threshold, double r2_threshold) {
    std::vector<double> series;
    series.reserve(trace.rounds.size());
    for (const auto& r : trace.rounds) series.push_back(static_cast<double>(r.unfinished()));
    return detect_growth(series, slope_threshold, r2_threshold);
}

Summary summarize(const MetricsTrace& trace) {
    Summary out;
    out.injected = trace.txns.size();
    double pending_sum = 0;
    for (const auto& r : trace.rounds) {
        pending_sum += static_cast<double>(r.unfinished());
        out.max_pending = std::max(out.max_pending, r.unfinished());
    }
    if (!trace.rounds.empty()) {
        out.avg_pending = pending_sum / static_cast<double>(trace.rounds.size());
        out.committed = trace.rounds.back().committed_cum;
        out.aborted = trace.rounds.back().aborted_cum;
        out.unfinished_at_end = trace.rounds.back().unfinished();
    }
    double latency_sum = 0;
    std::uint64_t finished = 0;
    for (const auto& t : trace.txns) {
        if (auto l = t.latency()) {
            latency_sum += static_cast<double>(*l);
            out.max_latency = std::max(out.max_latency, *l);
            ++finished;
        }
    }
    if (finished) out.avg_latency = latency_sum / static_cast<double>(finished);
    out.avg_shard_queue.assign(trace.shards, 0.0);
    out.max_shard_queue.assign(trace.shards, 0);
    for (const auto& row : trace.shard_queue) {
        for (std::uint32_t s = 0; s < trace.shards && s < row.size(); ++s) {
            out.avg_shard_queue[s] += row[s];
            out.max_shard_queue[s] = std::max(out.max_shard_queue[s], row[s]);
        }
    }
    if (!trace.shard_queue.empty()) {
        for (auto& v : out.avg_shard_queue) v /= static_cast<double>(trace.shard_queue.size());
    }
    return out;
}

void StabilityReport::violate(std::string what) {
    if (!precondition) return;
    ok = false;
    if (violation_count++ == 0) first_violation = std::move(what);
}

}  // namespace shard_sched
