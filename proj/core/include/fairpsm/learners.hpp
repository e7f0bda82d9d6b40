#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "fairpsm/dataset.hpp"

namespace fairpsm {

double sigmoid(double z);

struct LogisticConfig {
    double learning_rate = 0.1;
    double l2_penalty = 1e-4;   // applied to weights, not the bias
    size_t max_iters = 2000;
    double tolerance = 1e-8;
};

// L2-regularized logistic regression trained by deterministic full-batch
// gradient descent from zero initialization.
struct LogisticModel {
    std::vector<double> weights;
    double bias = 0.0;
    LogisticConfig config;
    size_t iters_run = 0;
    double final_loss = 0.0;

    double score(std::span<const double> x) const; // linear term
    double predict_one(std::span<const double> x) const;
};

LogisticModel fit_logistic(const Matrix& features, const std::vector<int>& labels,
                           const LogisticConfig& config = {});
std::vector<double> predict_proba(const LogisticModel& model, const Matrix& features);

// Mean clipped log-loss plus the L2 term; exposed so the finite-difference
// gradient check can evaluate exactly what fit_logistic minimizes.
double logistic_loss(const Matrix& features, const std::vector<int>& labels,
                     std::span<const double> weights, double bias, double l2_penalty);
void logistic_gradient(const Matrix& features, const std::vector<int>& labels,
                       std::span<const double> weights, double bias, double l2_penalty,
                       std::span<double> grad_w, double& grad_b);

struct GbtConfig {
    size_t n_rounds = 50;
    size_t max_depth = 3;
    double shrinkage = 0.1;
    size_t min_leaf = 1;
};

struct TreeNode {
    int feature = -1;       // -1 marks a leaf
    double threshold = 0.0; // go left when x[feature] <= threshold
    double value = 0.0;     // leaf output
    int left = -1;
    int right = -1;
};

struct Tree {
    std::vector<TreeNode> nodes; // node 0 is the root
    double eval(std::span<const double> x) const;
};

// Gradient boosting on logistic loss with exact greedy splits. A stand-in for
// a full boosting library: depth-limited trees, Newton leaf values,
// deterministic split selection (best gain, ties broken by lowest feature
// index then lowest threshold).
struct GbtModel {
    std::vector<Tree> trees;
    double base_score = 0.0; // log-odds of the training base rate
    size_t n_features = 0;
    GbtConfig config;

    double predict_one(std::span<const double> x) const;
};

GbtModel fit_gbt(const Matrix& features, const std::vector<int>& labels,
                 const GbtConfig& config = {});
std::vector<double> predict_proba(const GbtModel& model, const Matrix& features);

// Either learner behind one interface, for the harness and the propensity
// stage of matching.
class Learner {
public:
    virtual ~Learner() = default;
    virtual std::vector<double> predict(const Matrix& features) const = 0;
    virtual std::string kind() const = 0;
    virtual std::string to_json() const = 0;
};

std::unique_ptr<Learner> wrap(LogisticModel model);
std::unique_ptr<Learner> wrap(GbtModel model);
std::unique_ptr<Learner> fit_learner(const std::string& kind, const Matrix& features,
                                     const std::vector<int>& labels);
std::unique_ptr<Learner> learner_from_json(const std::string& json_text);

} // namespace fairpsm
