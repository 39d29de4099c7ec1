#include "shard_sched/report.hpp"

#include <algorithm>
#include <cstdio>
#include <ostream>

namespace shard_sched {

std::string fixed6(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return buf;
}

void write_rounds_csv(std::ostream& out, const MetricsTrace& trace) {
    out << "round,pending_total,in_flight,committed_cum,aborted_cum\n";
    for (const auto& r : trace.rounds) {
        out << r.round << ',' << r.pending_total << ',' << r.in_flight << ',' << r.committed_cum << ','
            << r.aborted_cum << '\n';
    }
}

void write_summary_csv(std::ostream& out, const Summary& s, const GrowthResult& g, const StabilityReport& st) {
    out << "injected,committed,aborted,unfinished_at_end,avg_pending,max_pending,avg_latency,max_latency,"
           "growing,slope,r2,bounds_asserted,bounds_ok,violations,first_violation\n";
    out << s.injected << ',' << s.committed << ',' << s.aborted << ',' << s.unfinished_at_end << ','
        << fixed6(s.avg_pending) << ',' << s.max_pending << ',' << fixed6(s.avg_latency) << ',' << s.max_latency
        << ',' << (g.growing ? 1 : 0) << ',' << fixed6(g.slope) << ',' << fixed6(g.r2) << ','
        << (st.precondition ? 1 : 0) << ',' << (st.ok ? 1 : 0) << ',' << st.violation_count << ",\""
        << st.first_violation << "\"\n";
}

void write_sweep_csv(std::ostream& out, std::span<const SweepPoint> points) {
    out << "rho,b,avg_pending,avg_latency,max_pending,max_latency,committed,aborted,unfinished,growing\n";
    for (const auto& p : points) {
        out << fixed6(p.rho.value()) << ',' << p.b << ',' << fixed6(p.summary.avg_pending) << ','
            << fixed6(p.summary.avg_latency) << ',' << p.summary.max_pending << ',' << p.summary.max_latency << ','
            << p.summary.committed << ',' << p.summary.aborted << ',' << p.summary.unfinished_at_end << ','
            << (p.growth.growing ? 1 : 0) << '\n';
    }
}

namespace {

constexpr double width = 640, height = 400, left = 70, right = 20, top = 30, bottom = 50;
constexpr const char* palette[] = {"#4477aa", "#ee6677", "#228833", "#ccbb44", "#66ccee", "#aa3377"};

struct Axes {
    std::vector<Rational> rhos;
    std::vector<std::int64_t> bs;
    double ymax = 1;
};

Axes axes_for(std::span<const SweepPoint> points, double (*value)(const SweepPoint&)) {
    Axes a;
    for (const auto& p : points) {
        if (std::find(a.rhos.begin(), a.rhos.end(), p.rho) == a.rhos.end()) a.rhos.push_back(p.rho);
        if (std::find(a.bs.begin(), a.bs.end(), p.b) == a.bs.end()) a.bs.push_back(p.b);
        a.ymax = std::max(a.ymax, value(p));
    }
    a.ymax *= 1.05;
    return a;
}

double y_of(const Axes& a, double v) { return top + (height - top - bottom) * (1.0 - v / a.ymax); }

void frame(std::ostream& out, const Axes& a, const char* title, const char* ylabel) {
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
        << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    out << "<text x=\"" << width / 2 << "\" y=\"18\" text-anchor=\"middle\" font-size=\"14\">" << title << "</text>\n";
    out << "<line x1=\"" << left << "\" y1=\"" << top << "\" x2=\"" << left << "\" y2=\"" << height - bottom
        << "\" stroke=\"black\"/>\n";
    out << "<line x1=\"" << left << "\" y1=\"" << height - bottom << "\" x2=\"" << width - right << "\" y2=\""
        << height - bottom << "\" stroke=\"black\"/>\n";
    for (int i = 0; i <= 5; ++i) {
        const double v = a.ymax * i / 5;
        const double y = y_of(a, v);
        out << "<line x1=\"" << left - 4 << "\" y1=\"" << y << "\" x2=\"" << left << "\" y2=\"" << y
            << "\" stroke=\"black\"/>\n";
        out << "<text x=\"" << left - 6 << "\" y=\"" << y + 4 << "\" text-anchor=\"end\">" << fixed6(v).substr(0, 10)
            << "</text>\n";
    }
    out << "<text x=\"16\" y=\"" << height / 2 << "\" transform=\"rotate(-90 16 " << height / 2
        << ")\" text-anchor=\"middle\">" << ylabel << "</text>\n";
    out << "<text x=\"" << (left + width - right) / 2 << "\" y=\"" << height - 10
        << "\" text-anchor=\"middle\">injection rate rho</text>\n";
    for (std::size_t i = 0; i < a.bs.size(); ++i) {
        const double y = top + 14 * static_cast<double>(i);
        out << "<rect x=\"" << width - right - 90 << "\" y=\"" << y << "\" width=\"10\" height=\"10\" fill=\""
            << palette[i % 6] << "\"/>\n";
        out << "<text x=\"" << width - right - 76 << "\" y=\"" << y + 9 << "\">b = " << a.bs[i] << "</text>\n";
    }
}

double slot_width(const Axes& a) { return (width - left - right) / static_cast<double>(std::max<std::size_t>(a.rhos.size(), 1)); }

void x_labels(std::ostream& out, const Axes& a) {
    const double w = slot_width(a);
    for (std::size_t i = 0; i < a.rhos.size(); ++i) {
        out << "<text x=\"" << left + w * (static_cast<double>(i) + 0.5) << "\" y=\"" << height - bottom + 16
            << "\" text-anchor=\"middle\">" << fixed6(a.rhos[i].value()).substr(0, 5) << "</text>\n";
    }
}

std::size_t index_of(const auto& v, const auto& x) {
    return static_cast<std::size_t>(std::find(v.begin(), v.end(), x) - v.begin());
}

}  // namespace

void write_pending_svg(std::ostream& out, std::span<const SweepPoint> points) {
    const auto value = [](const SweepPoint& p) { return p.summary.avg_pending; };
    const Axes a = axes_for(points, value);
    frame(out, a, "Average pending transactions", "avg pending");
    const double w = slot_width(a);
    const double bar = w * 0.8 / static_cast<double>(std::max<std::size_t>(a.bs.size(), 1));
    for (const auto& p : points) {
        const auto xi = index_of(a.rhos, p.rho);
        const auto bi = index_of(a.bs, p.b);
        const double x = left + w * static_cast<double>(xi) + w * 0.1 + bar * static_cast<double>(bi);
        const double y = y_of(a, value(p));
        out << "<rect x=\"" << x << "\" y=\"" << y << "\" width=\"" << bar << "\" height=\"" << height - bottom - y
            << "\" fill=\"" << palette[bi % 6] << "\"/>\n";
    }
    x_labels(out, a);
    out << "</svg>\n";
}

void write_latency_svg(std::ostream& out, std::span<const SweepPoint> points) {
    const auto value = [](const SweepPoint& p) { return p.summary.avg_latency; };
    const Axes a = axes_for(points, value);
    frame(out, a, "Average transaction latency", "avg latency (rounds)");
    const double w = slot_width(a);
    for (std::size_t bi = 0; bi < a.bs.size(); ++bi) {
        std::string pts;
        for (const auto& p : points) {
            if (p.b != a.bs[bi]) continue;
            const double x = left + w * (static_cast<double>(index_of(a.rhos, p.rho)) + 0.5);
            const double y = y_of(a, value(p));
            pts += std::to_string(x) + "," + std::to_string(y) + " ";
            out << "<circle cx=\"" << x << "\" cy=\"" << y << "\" r=\"3\" fill=\"" << palette[bi % 6] << "\"/>\n";
        }
        out << "<polyline points=\"" << pts << "\" fill=\"none\" stroke=\"" << palette[bi % 6] << "\"/>\n";
    }
    x_labels(out, a);
    out << "</svg>\n";
}

}  // namespace shard_sched
