#include "svcsched/channel.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <stdexcept>

namespace svcsched {

namespace {

// Reachability over positive entries of the transition graph.
std::vector<bool> reachable_from(const std::vector<std::vector<double>>& p, int origin, bool reverse) {
    int n = static_cast<int>(p.size());
    std::vector<bool> seen(n, false);
    std::vector<int> stack{origin};
    seen[origin] = true;
    while (!stack.empty()) {
        int i = stack.back();
        stack.pop_back();
        for (int j = 0; j < n; ++j) {
            double edge = reverse ? p[j][i] : p[i][j];
            if (edge > 0.0 && !seen[j]) {
                seen[j] = true;
                stack.push_back(j);
            }
        }
    }
    return seen;
}

}  // namespace

ChannelDiagnostics validate(const ChannelModel& model) {
    ChannelDiagnostics diag;
    int n = model.num_states();
    if (n == 0) {
        diag.violations.push_back("no channel states");
        return diag;
    }
    for (int i = 0; i < n; ++i) {
        if (!(model.states[i] >= 0.0))
            diag.violations.push_back("state " + std::to_string(i) + " has negative rate");
        if (i > 0 && !(model.states[i] > model.states[i - 1])) {
            diag.violations.push_back("states are not strictly increasing");
            break;
        }
    }
    if (static_cast<int>(model.transition.size()) != n) {
        diag.violations.push_back("transition matrix row count does not match state count");
        return diag;
    }
    for (int i = 0; i < n; ++i) {
        if (static_cast<int>(model.transition[i].size()) != n) {
            diag.violations.push_back("transition row " + std::to_string(i) + " has wrong length");
            return diag;
        }
        double sum = 0.0;
        for (double v : model.transition[i]) {
            if (v < 0.0 || v > 1.0) {
                diag.violations.push_back("transition row " + std::to_string(i) +
                                          " has an entry outside [0,1]");
                break;
            }
            sum += v;
        }
        if (std::abs(sum - 1.0) > 1e-12)
            diag.violations.push_back("transition row " + std::to_string(i) +
                                      " is not stochastic (sum " + std::to_string(sum) + ")");
    }
    if (diag.ok()) {
        auto fwd = reachable_from(model.transition, 0, false);
        auto bwd = reachable_from(model.transition, 0, true);
        for (int i = 0; i < n; ++i) {
            if (!fwd[i] || !bwd[i]) {
                diag.violations.push_back("transition matrix is reducible");
                break;
            }
        }
    }
    return diag;
}

void validate_or_throw(const ChannelModel& model) {
    auto diag = validate(model);
    if (diag.ok()) return;
    std::string message = "invalid channel model:";
    for (const auto& v : diag.violations) message += " " + v + ";";
    throw std::invalid_argument(message);
}

std::vector<double> stationary_distribution(const ChannelModel& model) {
    validate_or_throw(model);
    int n = model.num_states();
    // (P^T - I) pi = 0 with the last balance equation replaced by sum(pi)=1.
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
    Eigen::VectorXd b = Eigen::VectorXd::Zero(n);
    for (int i = 0; i < n - 1; ++i) {
        for (int j = 0; j < n; ++j) a(i, j) = model.transition[j][i] - (i == j ? 1.0 : 0.0);
    }
    for (int j = 0; j < n; ++j) a(n - 1, j) = 1.0;
    b(n - 1) = 1.0;
    Eigen::VectorXd pi = a.fullPivLu().solve(b);
    std::vector<double> out(n);
    for (int i = 0; i < n; ++i) out[i] = pi(i);
    return out;
}

double avg_rate(const ChannelModel& model) {
    auto pi = stationary_distribution(model);
    double mean = 0.0;
    for (int i = 0; i < model.num_states(); ++i) mean += pi[i] * model.states[i];
    return mean;
}

int sub_segments_deliverable(double rate, double slot_duration, double layer_rate) {
    if (!(rate >= 0.0) || !(slot_duration > 0.0) || !(layer_rate > 0.0))
        throw std::invalid_argument("sub_segments_deliverable: arguments must be positive");
    // Guard against 3.0*... / landing a hair under an integer.
    return static_cast<int>(std::floor(rate * slot_duration / layer_rate + 1e-9));
}

int sample_next(const ChannelModel& model, int state_index, Rng& rng) {
    if (state_index < 0 || state_index >= model.num_states())
        throw std::invalid_argument("sample_next: state index out of range");
    double u = rng.next_double();
    const auto& row = model.transition[state_index];
    double cum = 0.0;
    for (int j = 0; j < model.num_states(); ++j) {
        cum += row[j];
        if (u < cum) return j;
    }
    return model.num_states() - 1;  // u landed in the top rounding sliver
}

ChannelModel make_doubly_stochastic_channel(std::vector<double> states, double target_avg_rate,
                                            double mixing) {
    if (states.empty()) throw std::invalid_argument("channel fixture: no states");
    if (!(mixing > 0.0) || mixing > 1.0)
        throw std::invalid_argument("channel fixture: mixing must be in (0,1]");
    double mean = 0.0;
    for (double s : states) mean += s;
    mean /= static_cast<double>(states.size());
    if (target_avg_rate > 0.0 && std::abs(target_avg_rate - mean) > 1e-12) {
        double scale = target_avg_rate / mean;
        for (double& s : states) s *= scale;
    }
    int n = static_cast<int>(states.size());
    ChannelModel model;
    model.states = std::move(states);
    model.transition.assign(n, std::vector<double>(n, mixing / n));
    for (int i = 0; i < n; ++i) model.transition[i][i] += 1.0 - mixing;
    return model;
}

}  // namespace svcsched
