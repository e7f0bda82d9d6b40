#include "fairpsm/learners.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <json.hpp>

#include "fairpsm/errors.hpp"

namespace fairpsm {

using nlohmann::ordered_json;

double sigmoid(double z) {
    if (z >= 0) {
        return 1.0 / (1.0 + std::exp(-z));
    }
    const double e = std::exp(z);
    return e / (1.0 + e);
}

namespace {

constexpr double kProbClip = 1e-12; // inside the loss only, never in reported scores

void check_training_input(const Matrix& features, const std::vector<int>& labels) {
    if (features.rows() != labels.size()) {
        throw InputError("feature rows != label count");
    }
    if (features.rows() == 0) throw InputError("empty training set");
    for (double v : features.data()) {
        if (!std::isfinite(v)) throw InputError("non-finite feature value");
    }
    const auto ones = static_cast<size_t>(std::count(labels.begin(), labels.end(), 1));
    if (ones == 0 || ones == labels.size()) {
        throw DataError("training labels take a single value");
    }
}

} // namespace

double LogisticModel::score(std::span<const double> x) const {
    double z = bias;
    for (size_t i = 0; i < weights.size(); ++i) z += weights[i] * x[i];
    return z;
}

double LogisticModel::predict_one(std::span<const double> x) const {
    if (x.size() != weights.size()) throw InputError("feature width does not match model");
    return sigmoid(score(x));
}

double logistic_loss(const Matrix& features, const std::vector<int>& labels,
                     std::span<const double> weights, double bias, double l2_penalty) {
    const size_t n = features.rows();
    double loss = 0.0;
    for (size_t r = 0; r < n; ++r) {
        double z = bias;
        auto x = features.row(r);
        for (size_t c = 0; c < weights.size(); ++c) z += weights[c] * x[c];
        double p = std::clamp(sigmoid(z), kProbClip, 1.0 - kProbClip);
        loss += labels[r] ? -std::log(p) : -std::log(1.0 - p);
    }
    loss /= static_cast<double>(n);
    double reg = 0.0;
    for (double w : weights) reg += w * w;
    return loss + 0.5 * l2_penalty * reg;
}

void logistic_gradient(const Matrix& features, const std::vector<int>& labels,
                       std::span<const double> weights, double bias, double l2_penalty,
                       std::span<double> grad_w, double& grad_b) {
    const size_t n = features.rows();
    const size_t d = weights.size();
    std::fill(grad_w.begin(), grad_w.end(), 0.0);
    grad_b = 0.0;
    for (size_t r = 0; r < n; ++r) {
        auto x = features.row(r);
        double z = bias;
        for (size_t c = 0; c < d; ++c) z += weights[c] * x[c];
        const double err = sigmoid(z) - static_cast<double>(labels[r]);
        for (size_t c = 0; c < d; ++c) grad_w[c] += err * x[c];
        grad_b += err;
    }
    const double inv_n = 1.0 / static_cast<double>(n);
    for (size_t c = 0; c < d; ++c) grad_w[c] = grad_w[c] * inv_n + l2_penalty * weights[c];
    grad_b *= inv_n;
}

namespace {

// One pass: mean clipped log-loss and its gradient at the current iterate.
double loss_and_gradient(const Matrix& features, const std::vector<int>& labels,
                         std::span<const double> weights, double bias, double l2_penalty,
                         std::span<double> grad_w, double& grad_b) {
    const size_t n = features.rows();
    const size_t d = weights.size();
    std::fill(grad_w.begin(), grad_w.end(), 0.0);
    grad_b = 0.0;
    double loss = 0.0;
    for (size_t r = 0; r < n; ++r) {
        auto x = features.row(r);
        double z = bias;
        for (size_t c = 0; c < d; ++c) z += weights[c] * x[c];
        const double p = sigmoid(z);
        const double pc = std::clamp(p, kProbClip, 1.0 - kProbClip);
        loss += labels[r] ? -std::log(pc) : -std::log(1.0 - pc);
        const double err = p - static_cast<double>(labels[r]);
        for (size_t c = 0; c < d; ++c) grad_w[c] += err * x[c];
        grad_b += err;
    }
    const double inv_n = 1.0 / static_cast<double>(n);
    loss *= inv_n;
    double reg = 0.0;
    for (size_t c = 0; c < d; ++c) {
        grad_w[c] = grad_w[c] * inv_n + l2_penalty * weights[c];
        reg += weights[c] * weights[c];
    }
    grad_b *= inv_n;
    return loss + 0.5 * l2_penalty * reg;
}

} // namespace

LogisticModel fit_logistic(const Matrix& features, const std::vector<int>& labels,
                           const LogisticConfig& config) {
    check_training_input(features, labels);

    LogisticModel model;
    model.config = config;
    model.weights.assign(features.cols(), 0.0);
    model.bias = 0.0;

    std::vector<double> grad(features.cols());
    std::vector<double> prev_w;
    double grad_b = 0.0;
    double prev_b = 0.0;
    double prev_loss = std::numeric_limits<double>::infinity();

    for (size_t iter = 0;; ++iter) {
        const double loss = loss_and_gradient(features, labels, model.weights, model.bias,
                                              config.l2_penalty, grad, grad_b);
        model.final_loss = loss;
        if (prev_loss - loss < config.tolerance) {
            if (loss > prev_loss) { // overshoot: keep the better iterate
                model.weights = std::move(prev_w);
                model.bias = prev_b;
                model.final_loss = prev_loss;
            }
            return model;
        }
        if (iter == config.max_iters) return model;
        prev_w = model.weights;
        prev_b = model.bias;
        prev_loss = loss;
        for (size_t c = 0; c < grad.size(); ++c) model.weights[c] -= config.learning_rate * grad[c];
        model.bias -= config.learning_rate * grad_b;
        model.iters_run = iter + 1;
    }
}

std::vector<double> predict_proba(const LogisticModel& model, const Matrix& features) {
    if (features.cols() != model.weights.size()) {
        throw InputError("feature width does not match model");
    }
    std::vector<double> probs(features.rows());
    for (size_t r = 0; r < features.rows(); ++r) probs[r] = sigmoid(model.score(features.row(r)));
    return probs;
}

// ---------------------------------------------------------------------------
// Gradient boosted trees
// ---------------------------------------------------------------------------

double Tree::eval(std::span<const double> x) const {
    int node = 0;
    while (nodes[node].feature >= 0) {
        const auto& n = nodes[node];
        node = x[static_cast<size_t>(n.feature)] <= n.threshold ? n.left : n.right;
    }
    return nodes[node].value;
}

namespace {

struct SplitChoice {
    bool found = false;
    int feature = -1;
    double threshold = 0.0;
    double gain = 0.0;
};

// Exact greedy split on squared-error reduction of the gradient targets.
SplitChoice best_split(const Matrix& x, const std::vector<double>& g,
                       const std::vector<size_t>& rows, size_t min_leaf) {
    SplitChoice best;
    const double total = std::accumulate(rows.begin(), rows.end(), 0.0,
                                         [&](double acc, size_t r) { return acc + g[r]; });
    const auto n = static_cast<double>(rows.size());

    std::vector<std::pair<double, size_t>> order(rows.size());
    for (int f = 0; f < static_cast<int>(x.cols()); ++f) {
        for (size_t i = 0; i < rows.size(); ++i) {
            order[i] = {x.at(rows[i], static_cast<size_t>(f)), rows[i]};
        }
        std::sort(order.begin(), order.end());

        double left_sum = 0.0;
        for (size_t i = 0; i + 1 < order.size(); ++i) {
            left_sum += g[order[i].second];
            if (order[i].first == order[i + 1].first) continue; // no boundary here
            const size_t left_n = i + 1;
            const size_t right_n = order.size() - left_n;
            if (left_n < min_leaf || right_n < min_leaf) continue;
            const double right_sum = total - left_sum;
            const double gain = left_sum * left_sum / static_cast<double>(left_n) +
                                right_sum * right_sum / static_cast<double>(right_n) -
                                total * total / n;
            const double threshold = 0.5 * (order[i].first + order[i + 1].first);
            // strict improvement keeps tie-breaking at (lowest feature, lowest threshold)
            if (gain > best.gain + 1e-12 && gain > 1e-12) {
                best = {true, f, threshold, gain};
            }
        }
    }
    return best;
}

int build_tree(Tree& tree, const Matrix& x, const std::vector<double>& g,
               const std::vector<double>& h, std::vector<size_t> rows,
               size_t depth, const GbtConfig& cfg) {
    SplitChoice split;
    if (depth < cfg.max_depth && rows.size() >= 2 * cfg.min_leaf) {
        split = best_split(x, g, rows, cfg.min_leaf);
    }
    const int id = static_cast<int>(tree.nodes.size());
    tree.nodes.emplace_back();
    if (!split.found) {
        double gsum = 0.0, hsum = 0.0;
        for (size_t r : rows) {
            gsum += g[r];
            hsum += h[r];
        }
        tree.nodes[id].value = hsum > 1e-12 ? gsum / hsum : 0.0; // Newton step
        return id;
    }
    std::vector<size_t> left, right;
    for (size_t r : rows) {
        (x.at(r, static_cast<size_t>(split.feature)) <= split.threshold ? left : right).push_back(r);
    }
    tree.nodes[id].feature = split.feature;
    tree.nodes[id].threshold = split.threshold;
    const int l = build_tree(tree, x, g, h, std::move(left), depth + 1, cfg);
    const int r = build_tree(tree, x, g, h, std::move(right), depth + 1, cfg);
    tree.nodes[id].left = l;
    tree.nodes[id].right = r;
    return id;
}

} // namespace

double GbtModel::predict_one(std::span<const double> x) const {
    if (x.size() != n_features) throw InputError("feature width does not match model");
    double z = base_score;
    for (const auto& tree : trees) z += config.shrinkage * tree.eval(x);
    return sigmoid(z);
}

GbtModel fit_gbt(const Matrix& features, const std::vector<int>& labels, const GbtConfig& config) {
    check_training_input(features, labels);

    GbtModel model;
    model.config = config;
    model.n_features = features.cols();
    const size_t n = features.rows();
    const double base_rate =
        static_cast<double>(std::count(labels.begin(), labels.end(), 1)) / static_cast<double>(n);
    model.base_score = std::log(base_rate / (1.0 - base_rate));

    std::vector<double> margin(n, model.base_score);
    std::vector<double> g(n), h(n);
    std::vector<size_t> all(n);
    std::iota(all.begin(), all.end(), size_t{0});

    for (size_t round = 0; round < config.n_rounds; ++round) {
        for (size_t r = 0; r < n; ++r) {
            const double p = sigmoid(margin[r]);
            g[r] = static_cast<double>(labels[r]) - p; // negative gradient
            h[r] = std::max(p * (1.0 - p), 1e-12);
        }
        Tree tree;
        build_tree(tree, features, g, h, all, 0, config);
        for (size_t r = 0; r < n; ++r) {
            margin[r] += config.shrinkage * tree.eval(features.row(r));
        }
        model.trees.push_back(std::move(tree));
    }
    return model;
}

std::vector<double> predict_proba(const GbtModel& model, const Matrix& features) {
    std::vector<double> probs(features.rows());
    for (size_t r = 0; r < features.rows(); ++r) probs[r] = model.predict_one(features.row(r));
    return probs;
}

// ---------------------------------------------------------------------------
// Learner wrapper + JSON round trip
// ---------------------------------------------------------------------------

namespace {

class LogisticLearner final : public Learner {
public:
    explicit LogisticLearner(LogisticModel m) : model_(std::move(m)) {}
    std::vector<double> predict(const Matrix& features) const override {
        return predict_proba(model_, features);
    }
    std::string kind() const override { return "logistic"; }
    std::string to_json() const override {
        ordered_json j;
        j["kind"] = "logistic";
        j["weights"] = model_.weights;
        j["bias"] = model_.bias;
        j["config"] = {{"learning_rate", model_.config.learning_rate},
                       {"l2_penalty", model_.config.l2_penalty},
                       {"max_iters", model_.config.max_iters},
                       {"tolerance", model_.config.tolerance}};
        return j.dump(2);
    }
    LogisticModel model_;
};

class GbtLearner final : public Learner {
public:
    explicit GbtLearner(GbtModel m) : model_(std::move(m)) {}
    std::vector<double> predict(const Matrix& features) const override {
        return predict_proba(model_, features);
    }
    std::string kind() const override { return "gbt"; }
    std::string to_json() const override {
        ordered_json j;
        j["kind"] = "gbt";
        j["base_score"] = model_.base_score;
        j["n_features"] = model_.n_features;
        j["config"] = {{"n_rounds", model_.config.n_rounds},
                       {"max_depth", model_.config.max_depth},
                       {"shrinkage", model_.config.shrinkage},
                       {"min_leaf", model_.config.min_leaf}};
        ordered_json trees = ordered_json::array();
        for (const auto& tree : model_.trees) {
            ordered_json nodes = ordered_json::array();
            for (const auto& n : tree.nodes) {
                nodes.push_back({{"f", n.feature},
                                 {"t", n.threshold},
                                 {"v", n.value},
                                 {"l", n.left},
                                 {"r", n.right}});
            }
            trees.push_back(std::move(nodes));
        }
        j["trees"] = std::move(trees);
        return j.dump(2);
    }
    GbtModel model_;
};

} // namespace

std::unique_ptr<Learner> wrap(LogisticModel model) {
    return std::make_unique<LogisticLearner>(std::move(model));
}

std::unique_ptr<Learner> wrap(GbtModel model) {
    return std::make_unique<GbtLearner>(std::move(model));
}

std::unique_ptr<Learner> fit_learner(const std::string& kind, const Matrix& features,
                                     const std::vector<int>& labels) {
    if (kind == "logistic") return wrap(fit_logistic(features, labels));
    if (kind == "gbt") return wrap(fit_gbt(features, labels));
    throw ConfigError("unknown learner \"" + kind + "\" (expected logistic or gbt)");
}

std::unique_ptr<Learner> learner_from_json(const std::string& json_text) {
    const auto j = nlohmann::json::parse(json_text);
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "logistic") {
        LogisticModel m;
        m.weights = j.at("weights").get<std::vector<double>>();
        m.bias = j.at("bias").get<double>();
        const auto& c = j.at("config");
        m.config.learning_rate = c.at("learning_rate").get<double>();
        m.config.l2_penalty = c.at("l2_penalty").get<double>();
        m.config.max_iters = c.at("max_iters").get<size_t>();
        m.config.tolerance = c.at("tolerance").get<double>();
        return wrap(std::move(m));
    }
    if (kind == "gbt") {
        GbtModel m;
        m.base_score = j.at("base_score").get<double>();
        m.n_features = j.at("n_features").get<size_t>();
        const auto& c = j.at("config");
        m.config.n_rounds = c.at("n_rounds").get<size_t>();
        m.config.max_depth = c.at("max_depth").get<size_t>();
        m.config.shrinkage = c.at("shrinkage").get<double>();
        m.config.min_leaf = c.at("min_leaf").get<size_t>();
        for (const auto& tj : j.at("trees")) {
            Tree tree;
            for (const auto& nj : tj) {
                TreeNode n;
                n.feature = nj.at("f").get<int>();
                n.threshold = nj.at("t").get<double>();
                n.value = nj.at("v").get<double>();
                n.left = nj.at("l").get<int>();
                n.right = nj.at("r").get<int>();
                tree.nodes.push_back(n);
            }
            m.trees.push_back(std::move(tree));
        }
        return wrap(std::move(m));
    }
    throw ConfigError("model file has unknown kind \"" + kind + "\"");
}

} // namespace fairpsm
