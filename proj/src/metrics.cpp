#include "treecast/metrics.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "treecast/rng.hpp"

namespace treecast {

namespace {

std::uint64_t hash_bytes(const void* data, size_t len, std::uint64_t h) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (size_t i = 0; i < len; ++i) {
        h ^= p[i];
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::uint64_t hash_matrix(const Eigen::MatrixXd& m, std::uint64_t h) {
    return hash_bytes(m.data(), sizeof(double) * static_cast<size_t>(m.size()), h);
}

double series_slope(const Eigen::VectorXd& y) {
    const long n = y.size();
    if (n < 2) return 0.0;
    const double xbar = (static_cast<double>(n) - 1.0) / 2.0;
    const double ybar = y.mean();
    double num = 0.0, den = 0.0;
    for (long i = 0; i < n; ++i) {
        double dx = static_cast<double>(i) - xbar;
        num += dx * (y[i] - ybar);
        den += dx * dx;
    }
    return num / den;
}

void format_double(std::string* out, double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    out->append(buf);
}

}  // namespace

Eigen::VectorXd MetricsLog::rho() const {
    Eigen::VectorXd out = Eigen::VectorXd::Zero(capacities.size());
    if (slots == 0) return out;
    for (long e = 0; e < capacities.size(); ++e)
        out[e] = real_arrival_total[e] / (static_cast<double>(slots) * capacities[e]);
    return out;
}

std::uint64_t MetricsLog::byte_digest() const {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    h = hash_matrix(virtual_q, h);
    h = hash_matrix(real_q, h);
    h = hash_matrix(regulator, h);
    h = hash_matrix(arrivals, h);
    h = hash_matrix(tree_cost, h);
    h = hash_matrix(delivered, h);
    h = hash_bytes(tree_id.data(), sizeof(int) * static_cast<size_t>(tree_id.size()), h);
    for (const Tree& t : tree_table)
        h = hash_bytes(t.edges.data(), sizeof(LinkId) * t.edges.size(), h);
    return h;
}

double overflow_estimate(const Eigen::VectorXd& trace, double threshold, Window window) {
    if (window.width() <= 0 || window.begin < 0 || window.end > trace.size())
        throw ValidationError("overflow_estimate: empty or out-of-range window");
    long over = 0;
    for (long k = window.begin; k < window.end; ++k)
        if (trace[k] > threshold) ++over;
    return static_cast<double>(over) / static_cast<double>(window.width());
}

std::string_view verdict_name(Verdict v) {
    switch (v) {
        case Verdict::Stable: return "stable";
        case Verdict::Unstable: return "unstable";
        case Verdict::Inconclusive: return "inconclusive";
    }
    return "?";
}

namespace {

SeriesEvidence analyze_series(const Eigen::VectorXd& y, const ClassifyParams& params) {
    const long n = y.size();
    const long half = n / 2;
    SeriesEvidence ev;
    ev.slope = series_slope(y.segment(half, n - half));
    ev.first_half_max = half > 0 ? y.head(half).maxCoeff() : 0.0;
    ev.overflow_threshold = params.overflow_factor * std::max(ev.first_half_max, params.overflow_floor);
    Window tail{half, n};
    ev.tail_overflow = overflow_estimate(y, ev.overflow_threshold, tail);
    double base = std::max(ev.first_half_max, params.overflow_floor);
    for (double factor : {1.0, 2.0, 4.0})
        ev.overflow_grid.emplace_back(factor * base, overflow_estimate(y, factor * base, tail));
    return ev;
}

}  // namespace

StabilityVerdict classify(const MetricsLog& log, const ClassifyParams& params) {
    if (log.slots < params.min_slots)
        throw ValidationError("classify: run of " + std::to_string(log.slots) +
                              " slots is below the minimum " + std::to_string(params.min_slots));
    StabilityVerdict out;
    out.slope_threshold = params.slope_factor * log.meta.total_rate;
    out.virtual_series = analyze_series(log.vq_sum_series(), params);
    out.real_series = analyze_series(log.rq_sum_series(), params);

    const bool vq_grows = out.virtual_series.slope > out.slope_threshold;
    const bool rq_grows = out.real_series.slope > out.slope_threshold;
    if (vq_grows || rq_grows) {
        out.verdict = Verdict::Unstable;
        return out;
    }
    const bool vq_flat = std::abs(out.virtual_series.slope) <= out.slope_threshold;
    const bool rq_flat = std::abs(out.real_series.slope) <= out.slope_threshold;
    const bool no_overflow =
        out.virtual_series.tail_overflow == 0.0 && out.real_series.tail_overflow == 0.0;
    out.verdict = (vq_flat && rq_flat && no_overflow) ? Verdict::Stable : Verdict::Inconclusive;
    return out;
}

double loynes_oracle(const Eigen::VectorXd& x, double capacity, long k) {
    double best = 0.0;  // empty window
    for (long k0 = 0; k0 <= k; ++k0) {
        double sum = 0.0;
        for (long u = k0; u <= k; ++u) sum += x[u];
        best = std::max(best, sum - capacity * static_cast<double>(k - k0 + 1));
    }
    return best;
}

Eigen::VectorXd loynes_series(const Eigen::VectorXd& x, double capacity) {
    // With F(i) = sum_{u<i} x(u) - c*i, the window maximum at slot k equals
    // F(k+1) - min_{0<=j<=k+1} F(j); the minimum is carried forward.
    Eigen::VectorXd out(x.size());
    double f = 0.0;
    double fmin = 0.0;
    for (long k = 0; k < x.size(); ++k) {
        f += x[k] - capacity;
        fmin = std::min(fmin, f);
        out[k] = f - fmin;
    }
    return out;
}

LoynesChecker::LoynesChecker(const Eigen::VectorXd& capacities, int max_hops)
    : caps_(capacities),
      prefix_(FluidMatrix::Zero(capacities.size(), max_hops)),
      prefix_min_(FluidMatrix::Zero(capacities.size(), max_hops)) {}

void LoynesChecker::observe(const FluidMatrix& hop_arrivals, const FluidMatrix& hop_backlog) {
    const long links = prefix_.rows();
    const long hops = prefix_.cols();
    for (long e = 0; e < links; ++e) {
        Fluid cum_arrival = 0.0;
        Fluid cum_backlog = 0.0;
        for (long h = 0; h < hops; ++h) {
            cum_arrival += hop_arrivals(e, h);
            cum_backlog += hop_backlog(e, h);
            Fluid f = prefix_(e, h) + cum_arrival - static_cast<Fluid>(caps_[e]);
            prefix_(e, h) = f;
            Fluid fmin = std::min(prefix_min_(e, h), f);
            prefix_min_(e, h) = fmin;
            max_diff_ = std::max(max_diff_, std::abs((f - fmin) - cum_backlog));
        }
    }
}

double receiving_rate(const MetricsLog& log, int session, NodeId receiver, Window window) {
    if (window.width() <= 0 || window.begin < 0 || window.end > log.slots)
        throw ValidationError("receiving_rate: empty or out-of-range window");
    for (size_t c = 0; c < log.receiver_cols.size(); ++c) {
        if (log.receiver_cols[c] == std::make_pair(session, receiver)) {
            double sum = log.delivered.col(static_cast<long>(c))
                             .segment(window.begin, window.width())
                             .sum();
            return sum / static_cast<double>(window.width());
        }
    }
    throw ValidationError("receiving_rate: unknown receiver");
}

Eigen::VectorXd receiving_rate_series(const MetricsLog& log, int session, NodeId receiver) {
    for (size_t c = 0; c < log.receiver_cols.size(); ++c) {
        if (log.receiver_cols[c] == std::make_pair(session, receiver)) {
            Eigen::VectorXd out(log.slots);
            double cum = 0.0;
            for (long k = 0; k < log.slots; ++k) {
                cum += log.delivered(k, static_cast<long>(c));
                out[k] = cum / static_cast<double>(k + 1);
            }
            return out;
        }
    }
    throw ValidationError("receiving_rate_series: unknown receiver");
}

ControlOverhead control_overhead(long long nodes, long long links, double slot_seconds,
                                 long long header_bytes, long long id_bits) {
    if (nodes < 0 || links < 0) throw ValidationError("control_overhead: negative count");
    ControlOverhead c;
    c.forward_bits = (header_bytes * 8 + id_bits + id_bits) * nodes + id_bits * links;
    c.feedback_bits = (header_bytes * 8 + id_bits) * nodes + (id_bits + id_bits) * links;
    c.forward_bps = static_cast<double>(c.forward_bits) / slot_seconds;
    c.feedback_bps = static_cast<double>(c.feedback_bits) / slot_seconds;
    return c;
}

namespace {

class CsvWriter {
public:
    explicit CsvWriter(const std::string& path) : path_(path) {}

    void header(const std::vector<std::string>& cols) {
        for (size_t i = 0; i < cols.size(); ++i) {
            if (i) body_ += ',';
            body_ += cols[i];
        }
        body_ += '\n';
    }
    void begin_row(long slot) { body_ += std::to_string(slot); }
    void field(double v) {
        body_ += ',';
        format_double(&body_, v);
    }
    void field_int(long long v) {
        body_ += ',';
        body_ += std::to_string(v);
    }
    void field_text(const std::string& s) {
        body_ += ',';
        body_ += s;
    }
    void end_row() { body_ += '\n'; }

    void flush() {
        std::ofstream out(path_, std::ios::binary);
        if (!out) throw ValidationError("cannot write " + path_);
        out << body_;
    }

private:
    std::string path_;
    std::string body_;
};

}  // namespace

std::vector<std::string> export_csv(const MetricsLog& log, const std::string& dir) {
    std::filesystem::create_directories(dir);
    const std::string stem = dir + "/" + log.meta.digest + ".";
    std::vector<std::string> written;
    const long S = log.regulator.cols();
    const long E = log.virtual_q.cols();

    {
        CsvWriter w(stem + "virtual_queues.csv");
        std::vector<std::string> cols{"slot"};
        for (long e = 0; e < E; ++e) cols.push_back("link_" + std::to_string(e));
        w.header(cols);
        for (long k = 0; k < log.slots; ++k) {
            w.begin_row(k);
            for (long e = 0; e < E; ++e) w.field(log.virtual_q(k, e));
            w.end_row();
        }
        w.flush();
        written.push_back(stem + "virtual_queues.csv");
    }
    {
        CsvWriter w(stem + "real_queues.csv");
        std::vector<std::string> cols{"slot"};
        for (long e = 0; e < E; ++e) cols.push_back("link_" + std::to_string(e));
        w.header(cols);
        for (long k = 0; k < log.slots; ++k) {
            w.begin_row(k);
            for (long e = 0; e < E; ++e) w.field(log.real_q(k, e));
            w.end_row();
        }
        w.flush();
        written.push_back(stem + "real_queues.csv");
    }
    {
        CsvWriter w(stem + "regulators.csv");
        std::vector<std::string> cols{"slot"};
        for (long s = 0; s < S; ++s) {
            cols.push_back("session_" + std::to_string(s) + "_backlog");
            cols.push_back("session_" + std::to_string(s) + "_arrivals");
        }
        w.header(cols);
        for (long k = 0; k < log.slots; ++k) {
            w.begin_row(k);
            for (long s = 0; s < S; ++s) {
                w.field(log.regulator(k, s));
                w.field(log.arrivals(k, s));
            }
            w.end_row();
        }
        w.flush();
        written.push_back(stem + "regulators.csv");
    }
    {
        CsvWriter w(stem + "receiving_rates.csv");
        std::vector<std::string> cols{"slot"};
        for (const auto& [session, node] : log.receiver_cols) {
            std::string base = "s" + std::to_string(session) + "_r" + std::to_string(node);
            cols.push_back(base + "_delivered");
            cols.push_back(base + "_cumavg");
        }
        w.header(cols);
        std::vector<double> cum(log.receiver_cols.size(), 0.0);
        for (long k = 0; k < log.slots; ++k) {
            w.begin_row(k);
            for (size_t c = 0; c < log.receiver_cols.size(); ++c) {
                double d = log.delivered(k, static_cast<long>(c));
                cum[c] += d;
                w.field(d);
                w.field(cum[c] / static_cast<double>(k + 1));
            }
            w.end_row();
        }
        w.flush();
        written.push_back(stem + "receiving_rates.csv");
    }
    {
        CsvWriter w(stem + "tree_selections.csv");
        std::vector<std::string> cols{"slot"};
        const bool ratios = log.gamma_ratio.size() > 0;
        for (long s = 0; s < S; ++s) {
            cols.push_back("session_" + std::to_string(s) + "_tree");
            cols.push_back("session_" + std::to_string(s) + "_cost");
            if (ratios) cols.push_back("session_" + std::to_string(s) + "_ratio");
        }
        w.header(cols);
        for (long k = 0; k < log.slots; ++k) {
            w.begin_row(k);
            for (long s = 0; s < S; ++s) {
                w.field_int(log.tree_id(k, s));
                w.field(log.tree_cost(k, s));
                if (ratios) w.field(log.gamma_ratio(k, s));
            }
            w.end_row();
        }
        w.flush();
        written.push_back(stem + "tree_selections.csv");
    }
    {
        CsvWriter w(stem + "trees.csv");
        w.header({"tree", "session", "source", "edges"});
        for (size_t i = 0; i < log.tree_table.size(); ++i) {
            const Tree& t = log.tree_table[i];
            w.begin_row(static_cast<long>(i));
            w.field_int(t.session);
            w.field_int(t.source);
            std::string edges;
            for (size_t j = 0; j < t.edges.size(); ++j) {
                if (j) edges += ';';
                edges += std::to_string(t.edges[j]);
            }
            w.field_text(edges);
            w.end_row();
        }
        w.flush();
        written.push_back(stem + "trees.csv");
    }
    return written;
}

}  // namespace treecast
