#pragma once

#include "shard_sched/engine.hpp"

#include <iosfwd>

namespace shard_sched {

/// round,pending_total,in_flight,committed_cum,aborted_cum
void write_rounds_csv(std::ostream& out, const MetricsTrace& trace);

/// One header row and one value row.
void write_summary_csv(std::ostream& out, const Summary& summary, const GrowthResult& growth,
                       const StabilityReport& stability);

/// rho,b,avg_pending,avg_latency,max_pending,max_latency,committed,aborted,unfinished,growing
void write_sweep_csv(std::ostream& out, std::span<const SweepPoint> points);

/// Grouped bars of avg_pending over rho, one group member per b.
void write_pending_svg(std::ostream& out, std::span<const SweepPoint> points);
/// One line of avg_latency over rho per b.
void write_latency_svg(std::ostream& out, std::span<const SweepPoint> points);

/// Fixed six-decimal rendering used by every CSV writer.
std::string fixed6(double v);

}  // namespace shard_sched
