#include "tcprank/defect_model.hpp"

#include <cmath>
#include <fstream>

#include <json.hpp>

#include "tcprank/errors.hpp"
#include "tcprank/rng.hpp"

namespace tcprank {

using nlohmann::json;

namespace nn {

namespace {

inline double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

}  // namespace

double soft_f1_loss(const Eigen::VectorXd& probs, const Eigen::VectorXd& labels) {
    const double a = 2.0 * probs.dot(labels) + kSoftF1Epsilon;
    const double b = probs.sum() + labels.sum() + kSoftF1Epsilon;
    return 1.0 - a / b;
}

FeedForwardNet FeedForwardNet::init(int input_dim, int hidden_dim, Rng& rng) {
    FeedForwardNet net;
    net.w1.resize(input_dim, hidden_dim);
    net.b1 = Eigen::VectorXd::Zero(hidden_dim);
    net.w2.resize(hidden_dim);
    net.b2 = 0.0;
    const double a1 = std::sqrt(6.0 / (input_dim + hidden_dim));
    for (int r = 0; r < input_dim; ++r) {
        for (int c = 0; c < hidden_dim; ++c) net.w1(r, c) = rng.uniform(-a1, a1);
    }
    const double a2 = std::sqrt(6.0 / (hidden_dim + 1));
    for (int c = 0; c < hidden_dim; ++c) net.w2(c) = rng.uniform(-a2, a2);
    return net;
}

Eigen::VectorXd FeedForwardNet::forward(const Eigen::MatrixXd& X) const {
    Eigen::MatrixXd h = ((X * w1).rowwise() + b1.transpose());
    h = h.unaryExpr([](double z) { return sigmoid(z); });
    Eigen::VectorXd z2 = ((h * w2).array() + b2).matrix();
    return z2.unaryExpr([](double z) { return sigmoid(z); });
}

std::pair<double, FeedForwardNet::Gradients> FeedForwardNet::loss_and_gradients(
    const Eigen::MatrixXd& X, const Eigen::VectorXd& y) const {
    Eigen::MatrixXd h = ((X * w1).rowwise() + b1.transpose());
    h = h.unaryExpr([](double z) { return sigmoid(z); });
    Eigen::VectorXd z2 = ((h * w2).array() + b2).matrix();
    Eigen::VectorXd p = z2.unaryExpr([](double z) { return sigmoid(z); });

    const double a = 2.0 * p.dot(y) + kSoftF1Epsilon;
    const double b = p.sum() + y.sum() + kSoftF1Epsilon;
    const double loss = 1.0 - a / b;

    // dL/dp_i = -(2*y_i*b - a) / b^2
    Eigen::ArrayXd dp = (a - (2.0 * b) * y.array()) / (b * b);
    Eigen::VectorXd dz2 = (dp * p.array() * (1.0 - p.array())).matrix();

    Gradients g;
    g.w2 = h.transpose() * dz2;
    g.b2 = dz2.sum();
    Eigen::MatrixXd dh = dz2 * w2.transpose();
    Eigen::MatrixXd dz1 = (dh.array() * h.array() * (1.0 - h.array())).matrix();
    g.w1 = X.transpose() * dz1;
    g.b1 = dz1.colwise().sum().transpose();
    return {loss, std::move(g)};
}

AdamState::AdamState(const FeedForwardNet& net)
    : m_w1(Eigen::MatrixXd::Zero(net.w1.rows(), net.w1.cols())),
      v_w1(Eigen::MatrixXd::Zero(net.w1.rows(), net.w1.cols())),
      m_b1(Eigen::VectorXd::Zero(net.b1.size())),
      v_b1(Eigen::VectorXd::Zero(net.b1.size())),
      m_w2(Eigen::VectorXd::Zero(net.w2.size())),
      v_w2(Eigen::VectorXd::Zero(net.w2.size())) {}

void AdamState::apply(FeedForwardNet& net, const FeedForwardNet::Gradients& g,
                      double lr, double beta1, double beta2, double eps) {
    ++step;
    const double c1 = 1.0 - std::pow(beta1, static_cast<double>(step));
    const double c2 = 1.0 - std::pow(beta2, static_cast<double>(step));
    auto update = [&](auto& theta, auto& m, auto& v, const auto& grad) {
        m = beta1 * m + (1.0 - beta1) * grad;
        v = (beta2 * v.array() + (1.0 - beta2) * grad.array().square()).matrix();
        theta -= (lr * (m.array() / c1) / ((v.array() / c2).sqrt() + eps)).matrix();
    };
    update(net.w1, m_w1, v_w1, g.w1);
    update(net.b1, m_b1, v_b1, g.b1);
    update(net.w2, m_w2, v_w2, g.w2);
    m_b2 = beta1 * m_b2 + (1.0 - beta1) * g.b2;
    v_b2 = beta2 * v_b2 + (1.0 - beta2) * g.b2 * g.b2;
    net.b2 -= lr * (m_b2 / c1) / (std::sqrt(v_b2 / c2) + eps);
}

}  // namespace nn

std::size_t TrainingSet::positives() const {
    std::size_t n = 0;
    for (const auto& s : samples) n += s.label;
    return n;
}

TrainingSet build_training_set(const std::vector<VersionRecord>& history, int upto_version) {
    if (upto_version < 2) {
        throw std::invalid_argument("build_training_set: upto_version must be >= 2");
    }
    TrainingSet ts;
    for (const auto& v : history) {
        if (v.version_id >= upto_version) continue;
        for (const auto& cf : v.class_features) {
            ts.samples.push_back({cf.features, cf.is_buggy ? 1 : 0, v.version_id, cf.class_id});
        }
    }
    if (ts.positives() == 0) {
        throw NoPositivesError("build_training_set: no buggy class in versions before " +
                               std::to_string(upto_version));
    }
    return ts;
}

DefectModel::DefectModel(nn::FeedForwardNet net, Eigen::VectorXd feature_means,
                         Eigen::VectorXd feature_stds, std::uint64_t seed, TrainConfig config)
    : net_(std::move(net)),
      means_(std::move(feature_means)),
      stds_(std::move(feature_stds)),
      seed_(seed),
      config_(config) {}

double DefectModel::predict(std::span<const double> features) const {
    if (static_cast<int>(features.size()) != net_.input_dim()) {
        throw DimensionError("predict: expected " + std::to_string(net_.input_dim()) +
                             " features, got " + std::to_string(features.size()));
    }
    Eigen::MatrixXd x(1, net_.input_dim());
    for (int j = 0; j < net_.input_dim(); ++j) {
        if (!std::isfinite(features[j])) {
            throw NonFiniteInputError("predict: feature " + std::to_string(j + 1) + " is not finite");
        }
        x(0, j) = (features[j] - means_(j)) / stds_(j);
    }
    return net_.forward(x)(0);
}

DefectModel train(const TrainingSet& ts, const TrainConfig& cfg, std::vector<TrainLogEntry>* log) {
    std::vector<int> pos_idx, neg_idx;
    for (std::size_t i = 0; i < ts.samples.size(); ++i) {
        (ts.samples[i].label == 1 ? pos_idx : neg_idx).push_back(static_cast<int>(i));
    }
    if (pos_idx.empty()) {
        throw NoPositivesError("train: training set has no positive sample");
    }
    if (neg_idx.empty()) {
        throw DegenerateDataError("train: training set has no negative sample");
    }
    const int dim = static_cast<int>(ts.samples.front().features.size());
    for (const auto& s : ts.samples) {
        if (static_cast<int>(s.features.size()) != dim) {
            throw DimensionError("train: inconsistent feature vector lengths");
        }
        for (double f : s.features) {
            if (!std::isfinite(f)) {
                throw DegenerateDataError("train: non-finite feature for class '" + s.class_id +
                                          "' of version " + std::to_string(s.version_id));
            }
        }
    }

    // Standardization statistics over the whole training set (population std).
    const std::size_t n = ts.samples.size();
    Eigen::VectorXd means = Eigen::VectorXd::Zero(dim);
    for (const auto& s : ts.samples) {
        for (int j = 0; j < dim; ++j) means(j) += s.features[j];
    }
    means /= static_cast<double>(n);
    Eigen::VectorXd stds = Eigen::VectorXd::Zero(dim);
    for (const auto& s : ts.samples) {
        for (int j = 0; j < dim; ++j) {
            const double d = s.features[j] - means(j);
            stds(j) += d * d;
        }
    }
    for (int j = 0; j < dim; ++j) {
        // zero-variance features pass through centered, divisor 1
        stds(j) = stds(j) > 0.0 ? std::sqrt(stds(j) / static_cast<double>(n)) : 1.0;
    }

    Eigen::MatrixXd standardized(n, dim);
    Eigen::VectorXd labels(n);
    for (std::size_t i = 0; i < n; ++i) {
        for (int j = 0; j < dim; ++j) {
            standardized(static_cast<Eigen::Index>(i), j) = (ts.samples[i].features[j] - means(j)) / stds(j);
        }
        labels(static_cast<Eigen::Index>(i)) = ts.samples[i].label;
    }

    Rng rng(cfg.seed);
    nn::FeedForwardNet net = nn::FeedForwardNet::init(dim, 300, rng);
    nn::AdamState adam(net);

    const std::size_t want = static_cast<std::size_t>(
        std::ceil(cfg.neg_pos_ratio * static_cast<double>(pos_idx.size())));
    const std::size_t subsample = std::min(want, neg_idx.size());
    const std::size_t batch_size = pos_idx.size() + subsample;

    Eigen::MatrixXd batch_x(batch_size, dim);
    Eigen::VectorXd batch_y(batch_size);
    for (int it = 0; it < cfg.iterations; ++it) {
        const auto picks = rng.sample_without_replacement(neg_idx.size(), subsample);
        std::size_t row = 0;
        for (int i : pos_idx) {
            batch_x.row(row) = standardized.row(i);
            batch_y(row) = 1.0;
            ++row;
        }
        for (std::size_t p : picks) {
            batch_x.row(row) = standardized.row(neg_idx[p]);
            batch_y(row) = 0.0;
            ++row;
        }
        double last_loss = 0.0;
        for (int epoch = 0; epoch < cfg.epochs_per_iteration; ++epoch) {
            auto [loss, grads] = net.loss_and_gradients(batch_x, batch_y);
            adam.apply(net, grads, cfg.learning_rate, cfg.adam_beta1, cfg.adam_beta2,
                       cfg.adam_epsilon);
            last_loss = loss;
        }
        if (log) log->push_back({it, batch_size, last_loss});
    }

    return DefectModel(std::move(net), std::move(means), std::move(stds), cfg.seed, cfg);
}

double hard_f1(const DefectModel& model, const TrainingSet& ts, double threshold) {
    long tp = 0, fp = 0, fn = 0;
    for (const auto& s : ts.samples) {
        const bool predicted = model.predict(s.features) > threshold;
        if (predicted && s.label == 1) ++tp;
        if (predicted && s.label == 0) ++fp;
        if (!predicted && s.label == 1) ++fn;
    }
    const double denom = static_cast<double>(2 * tp + fp + fn);
    return denom > 0.0 ? 2.0 * static_cast<double>(tp) / denom : 0.0;
}

bool predicted_bug_diagnostic(const DefectModel& model, const VersionRecord& version) {
    for (const auto& cf : version.class_features) {
        if (cf.is_buggy && model.predict(cf.features) > kDiagnosticThreshold) {
            return true;
        }
    }
    return false;
}

namespace {

json vector_to_json(const Eigen::VectorXd& v) {
    json arr = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v(i));
    return arr;
}

Eigen::VectorXd vector_from_json(const json& arr) {
    Eigen::VectorXd v(arr.size());
    for (std::size_t i = 0; i < arr.size(); ++i) v(static_cast<Eigen::Index>(i)) = arr[i].get<double>();
    return v;
}

}  // namespace

std::string DefectModel::to_json() const {
    json j;
    j["input_dim"] = net_.input_dim();
    j["hidden_dim"] = net_.hidden_dim();
    json w1 = json::array();  // row-major
    for (int r = 0; r < net_.input_dim(); ++r) {
        for (int c = 0; c < net_.hidden_dim(); ++c) w1.push_back(net_.w1(r, c));
    }
    j["w1"] = std::move(w1);
    j["b1"] = vector_to_json(net_.b1);
    j["w2"] = vector_to_json(net_.w2);
    j["b2"] = net_.b2;
    j["feature_means"] = vector_to_json(means_);
    j["feature_stds"] = vector_to_json(stds_);
    j["seed"] = seed_;
    j["config"] = {{"iterations", config_.iterations},
                   {"neg_pos_ratio", config_.neg_pos_ratio},
                   {"learning_rate", config_.learning_rate},
                   {"epochs_per_iteration", config_.epochs_per_iteration},
                   {"seed", config_.seed},
                   {"adam_beta1", config_.adam_beta1},
                   {"adam_beta2", config_.adam_beta2},
                   {"adam_epsilon", config_.adam_epsilon}};
    return j.dump(2);
}

DefectModel DefectModel::from_json(const std::string& text) {
    json j = json::parse(text);
    const int in = j.at("input_dim").get<int>();
    const int hidden = j.at("hidden_dim").get<int>();
    nn::FeedForwardNet net;
    net.w1.resize(in, hidden);
    const auto& w1 = j.at("w1");
    for (int r = 0; r < in; ++r) {
        for (int c = 0; c < hidden; ++c) net.w1(r, c) = w1[static_cast<std::size_t>(r) * hidden + c].get<double>();
    }
    net.b1 = vector_from_json(j.at("b1"));
    net.w2 = vector_from_json(j.at("w2"));
    net.b2 = j.at("b2").get<double>();
    TrainConfig cfg;
    const auto& jc = j.at("config");
    cfg.iterations = jc.at("iterations").get<int>();
    cfg.neg_pos_ratio = jc.at("neg_pos_ratio").get<double>();
    cfg.learning_rate = jc.at("learning_rate").get<double>();
    cfg.epochs_per_iteration = jc.at("epochs_per_iteration").get<int>();
    cfg.seed = jc.at("seed").get<std::uint64_t>();
    cfg.adam_beta1 = jc.at("adam_beta1").get<double>();
    cfg.adam_beta2 = jc.at("adam_beta2").get<double>();
    cfg.adam_epsilon = jc.at("adam_epsilon").get<double>();
    return DefectModel(std::move(net), vector_from_json(j.at("feature_means")),
                       vector_from_json(j.at("feature_stds")), j.at("seed").get<std::uint64_t>(),
                       cfg);
}

void DefectModel::save(const std::filesystem::path& file) const {
    std::ofstream out(file, std::ios::binary);
    if (!out) {
        throw std::runtime_error(file.string() + ": cannot open for writing");
    }
    out << to_json() << '\n';
}

DefectModel DefectModel::load(const std::filesystem::path& file) {
    std::ifstream in(file, std::ios::binary);
    if (!in) {
        throw std::runtime_error(file.string() + ": cannot open");
    }
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return from_json(text);
}

}  // namespace tcprank
