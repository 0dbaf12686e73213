#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "tcprank/types.hpp"

namespace tcprank {

class Rng;

namespace nn {

// Differentiable surrogate for F1 over a batch:
//   loss = 1 - (2*sum(p*y) + eps) / (sum(p) + sum(y) + eps)
// Its optimum coincides with hard F1 on separated data.
inline constexpr double kSoftF1Epsilon = 1e-7;

double soft_f1_loss(const Eigen::VectorXd& probs, const Eigen::VectorXd& labels);

// Two-layer sigmoid network, dimensions parametric (the production model is
// kFeatureCount-300-1).
struct FeedForwardNet {
    Eigen::MatrixXd w1;  // in x hidden
    Eigen::VectorXd b1;  // hidden
    Eigen::VectorXd w2;  // hidden
    double b2 = 0.0;

    // Weights uniform in +-sqrt(6/(fan_in+fan_out)), biases zero.
    static FeedForwardNet init(int input_dim, int hidden_dim, Rng& rng);

    int input_dim() const { return static_cast<int>(w1.rows()); }
    int hidden_dim() const { return static_cast<int>(w1.cols()); }

    // Batch forward; X is samples x input_dim, returns per-sample sigmoid output.
    Eigen::VectorXd forward(const Eigen::MatrixXd& X) const;

    struct Gradients {
        Eigen::MatrixXd w1;
        Eigen::VectorXd b1;
        Eigen::VectorXd w2;
        double b2;
    };

    // Soft-F1 loss on the batch and its gradients wrt all parameters.
    std::pair<double, Gradients> loss_and_gradients(const Eigen::MatrixXd& X,
                                                    const Eigen::VectorXd& y) const;
};

// Adam state for one FeedForwardNet (beta1/beta2/epsilon from TrainConfig).
struct AdamState {
    Eigen::MatrixXd m_w1, v_w1;
    Eigen::VectorXd m_b1, v_b1, m_w2, v_w2;
    double m_b2 = 0.0, v_b2 = 0.0;
    long step = 0;

    explicit AdamState(const FeedForwardNet& net);
    void apply(FeedForwardNet& net, const FeedForwardNet::Gradients& g,
               double lr, double beta1, double beta2, double eps);
};

}  // namespace nn

struct TrainingSample {
    std::vector<double> features;  // length kFeatureCount
    int label = 0;                 // 1 buggy, 0 clean
    int version_id = 0;            // provenance
    std::string class_id;          // provenance
};

struct TrainingSet {
    std::vector<TrainingSample> samples;

    std::size_t positives() const;
    std::size_t negatives() const { return samples.size() - positives(); }
};

// One sample per (version, class) over all versions strictly before
// `upto_version`. Throws NoPositivesError when the window has no buggy class.
TrainingSet build_training_set(const std::vector<VersionRecord>& history, int upto_version);

struct TrainConfig {
    int iterations = 20;             // negative-subsampling rounds
    double neg_pos_ratio = 1.0;      // negatives drawn per positive, per round
    double learning_rate = 0.01;
    int epochs_per_iteration = 5;    // optimizer steps per round
    std::uint64_t seed = 0;
    // Adam parameters. The second-moment decay is deliberately fast: the
    // whole run is iterations*epochs steps, and the saturating soft-F1
    // plateau needs the step size to recover quickly once gradients shrink.
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.9;
    double adam_epsilon = 1e-8;
};

// Trained fault-proneness classifier together with the feature
// standardization computed from its training set.
class DefectModel {
public:
    DefectModel() = default;
    DefectModel(nn::FeedForwardNet net, Eigen::VectorXd feature_means,
                Eigen::VectorXd feature_stds, std::uint64_t seed, TrainConfig config);

    // Fault-proneness in (0,1). Throws NonFiniteInputError on non-finite
    // input and DimensionError on a wrong-length vector.
    double predict(std::span<const double> features) const;

    const nn::FeedForwardNet& net() const { return net_; }
    const Eigen::VectorXd& feature_means() const { return means_; }
    const Eigen::VectorXd& feature_stds() const { return stds_; }
    std::uint64_t seed() const { return seed_; }
    const TrainConfig& config() const { return config_; }

    // JSON round-trip is bit-exact at double precision.
    std::string to_json() const;
    static DefectModel from_json(const std::string& text);
    void save(const std::filesystem::path& file) const;
    static DefectModel load(const std::filesystem::path& file);

private:
    nn::FeedForwardNet net_;
    Eigen::VectorXd means_;
    Eigen::VectorXd stds_;
    std::uint64_t seed_ = 0;
    TrainConfig config_;
};

struct TrainLogEntry {
    int iteration;
    std::size_t batch_size;
    double loss;  // soft-F1 loss after the iteration's last step
};

// Deterministic in (ts, cfg): per iteration draws ceil(neg_pos_ratio *
// positives) negatives without replacement (capped at the available
// negatives), joins them with all positives and runs epochs_per_iteration
// Adam steps on the soft-F1 loss. Features are standardized with
// training-set statistics; zero-variance features pass through centered.
DefectModel train(const TrainingSet& ts, const TrainConfig& cfg,
                  std::vector<TrainLogEntry>* log = nullptr);

// Hard F1 of the model on a training set at the given threshold.
double hard_f1(const DefectModel& model, const TrainingSet& ts, double threshold = 0.5);

// True iff any truly-buggy class of the version scores above the
// fault-proneness cut-off used by the prediction diagnostic.
inline constexpr double kDiagnosticThreshold = 0.1;
bool predicted_bug_diagnostic(const DefectModel& model, const VersionRecord& version);

}  // namespace tcprank
