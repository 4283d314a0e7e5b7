#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "daid/domain.hpp"
#include "daid/rebalance.hpp"

namespace daid {

struct Matrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;  // row-major

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}

    double& at(std::size_t r, std::size_t c) { return data[r * cols + c]; }
    double at(std::size_t r, std::size_t c) const { return data[r * cols + c]; }

    bool operator==(const Matrix&) const = default;
};

struct Layer {
    Matrix w;               // out x in
    std::vector<double> b;  // out

    bool operator==(const Layer&) const = default;
};

/// Encoder (affine chain with tanh between layers, linear last layer
/// producing h), trainable projection basis U, and sigmoid head.
struct ModelParams {
    std::vector<Layer> encoder;
    Matrix proj;                 // d_h x r
    std::vector<double> head_w;  // r
    double head_b = 0.0;

    std::size_t d_in() const { return encoder.front().w.cols; }
    std::size_t d_h() const { return encoder.back().w.rows; }
    std::size_t r() const { return proj.cols; }
    void validate() const;

    bool operator==(const ModelParams&) const = default;
};

/// Same shapes as ModelParams; holds gradients or optimizer moments.
struct Gradients {
    std::vector<Layer> encoder;
    Matrix proj;
    std::vector<double> head_w;
    double head_b = 0.0;

    static Gradients zeros_like(const ModelParams& p);
};

enum class AlignSpace { Projected, Normalized };
enum class OrthoMode { Columns, Rows };
enum class WeightNorm { Global, Batch };
enum class NormStats { Epoch, Batch };

AlignSpace align_space_from_string(const std::string& s);
OrthoMode ortho_mode_from_string(const std::string& s);
WeightNorm weight_norm_from_string(const std::string& s);
NormStats norm_stats_from_string(const std::string& s);
std::string to_string(AlignSpace v);
std::string to_string(OrthoMode v);
std::string to_string(WeightNorm v);
std::string to_string(NormStats v);

struct LossBreakdown {
    double total = 0.0;
    double cls = 0.0;
    double attr = 0.0;
    double ortho = 0.0;
    double lambda_attr = 0.0;
    double lambda_ortho = 0.0;
    std::int64_t n_pairs = 0;
};

struct BatchOptions {
    double lambda_attr = 0.7;
    double lambda_ortho = 0.2;
    bool use_attr = true;
    bool use_ortho = true;
    AlignSpace align_space = AlignSpace::Projected;
    OrthoMode ortho_mode = OrthoMode::Columns;
    std::int64_t pair_cap = 512;
};

struct OptimizerState {
    double lr = 1e-3;
    double weight_decay = 4e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    std::int64_t t = 0;
    Gradients m;
    Gradients v;

    static OptimizerState init(const ModelParams& p, double lr, double weight_decay);
};

struct TrainConfig {
    std::vector<std::size_t> hidden = {32, 32};
    std::size_t d_h = 16;
    std::size_t r = 8;
    std::int64_t epochs = 30;
    std::int64_t batch_size = 64;
    double lr = 1e-3;
    double weight_decay = 4e-3;
    double lambda_attr = 0.7;
    double lambda_ortho = 0.2;
    std::int64_t pair_cap = 512;
    std::uint64_t seed = 0;
    // Regime flags; all off reduces training to plain unweighted BCE.
    bool reweight = false;
    bool normalize = false;
    bool attr = false;
    bool ortho = false;
    AlignSpace align_space = AlignSpace::Projected;
    OrthoMode ortho_mode = OrthoMode::Columns;
    WeightNorm weight_norm = WeightNorm::Global;
    NormStats norm_stats = NormStats::Epoch;
    bool joint_propensity = false;

    void validate() const;

    bool operator==(const TrainConfig&) const = default;
};

struct EpochStats {
    std::int64_t epoch = 0;
    double cls = 0.0;
    double attr = 0.0;
    double ortho = 0.0;
    double total = 0.0;
    double train_auc = 0.0;

    bool operator==(const EpochStats&) const = default;
};

struct TrainResult {
    ModelParams params;
    std::vector<EpochStats> history;
    // Training-set statistics frozen for evaluation. moments is meaningful
    // only when the normalize flag was on; propensity only under reweight.
    SubgroupMoments moments;
    bool has_moments = false;
    PropensityTable propensity;
    TrainConfig config;
};

struct ForwardResult {
    // acts[0] = input; acts[l] = post-nonlinearity output of layer l-1;
    // acts.back() = h (last layer is linear).
    std::vector<std::vector<double>> acts;
    std::vector<double> h;
    std::vector<double> hhat;     // normalized latent (h when moments absent)
    std::vector<double> inv_std;  // 1/sqrt(var+eps) per coordinate; empty when moments absent
    std::vector<double> htilde;   // U^T hhat
    double z_head = 0.0;
    double score = 0.0;
};

/// Fresh parameters: Xavier-uniform affine layers, U with orthonormalized
/// columns, zero head.
ModelParams init_params(std::size_t d_in, const std::vector<std::size_t>& hidden,
                        std::size_t d_h, std::size_t r, std::mt19937_64& rng);

/// Full forward pass for one sample. moments == nullptr skips normalization.
ForwardResult forward(const ModelParams& params, const std::vector<double>& x,
                      const SubgroupMoments* moments = nullptr,
                      const SubgroupKey* group = nullptr);

/// Encoder output h only.
std::vector<double> encode(const ModelParams& params, const std::vector<double>& x);

/// 1 - <a,b> / (max(|a|,delta) * max(|b|,delta)); zero vectors give cos 0.
double cosine_loss(const std::vector<double>& a, const std::vector<double>& b);

/// Mean cosine_loss over all pairs i<j with equal label and different group.
/// Returns (0, 0) when no valid pair exists.
std::pair<double, std::int64_t> attr_loss(const std::vector<std::vector<double>>& latents,
                                          const std::vector<int>& labels,
                                          const std::vector<SubgroupKey>& groups);

/// Columns: |U^T U - I_r|_F^2. Rows: |U U^T - I_dh|_F^2.
double ortho_loss(const Matrix& u, OrthoMode mode = OrthoMode::Columns);

/// Loss over one batch. weights align with batch (pass 1s for unweighted).
/// pair_seed fixes the alignment-pair subsample when pairs exceed the cap.
LossBreakdown total_loss(const ModelParams& params, const std::vector<const Sample*>& batch,
                         const std::vector<double>& weights, const SubgroupMoments* moments,
                         const BatchOptions& opts, std::uint64_t pair_seed = 0);

/// Analytic gradients of total_loss; identical batch evaluation, so the same
/// pair_seed yields the exact loss the gradients differentiate.
LossBreakdown backward(const ModelParams& params, const std::vector<const Sample*>& batch,
                       const std::vector<double>& weights, const SubgroupMoments* moments,
                       const BatchOptions& opts, Gradients& grads, std::uint64_t pair_seed = 0);

/// AdamW with decoupled weight decay and bias-corrected moments.
void optimizer_step(OptimizerState& state, ModelParams& params, const Gradients& grads);

/// Mini-batch training per the regime flags in config. Deterministic for a
/// fixed seed; throws NonFiniteLoss/NonFiniteGradient with the offending
/// epoch and batch on divergence.
TrainResult train(const Dataset& ds, const TrainConfig& config);

/// Scores for a whole dataset under frozen training statistics.
std::vector<double> score_dataset(const TrainResult& model, const Dataset& ds);

}  // namespace daid
