#include "daid/model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "daid/errors.hpp"
#include "daid/metrics.hpp"
#include "daid/rng.hpp"

namespace daid {

namespace {

constexpr double kCosineDelta = 1e-8;

double softplus(double x) {
    return std::log1p(std::exp(-std::abs(x))) + std::max(x, 0.0);
}

double sigmoid(double x) {
    if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

}  // namespace

void ModelParams::validate() const {
    if (encoder.empty()) throw ConfigError("model: encoder has no layers");
    std::size_t prev = encoder.front().w.cols;
    for (const auto& l : encoder) {
        if (l.w.rows == 0 || l.w.cols == 0) throw ShapeMismatch("model: empty layer");
        if (l.w.cols != prev) throw ShapeMismatch("model: layer input does not chain");
        if (l.b.size() != l.w.rows) throw ShapeMismatch("model: bias length mismatch");
        prev = l.w.rows;
    }
    if (proj.rows != prev) throw ShapeMismatch("model: projection rows != d_h");
    if (proj.cols > proj.rows) throw ConfigError("model: r exceeds d_h");
    if (proj.cols == 0) throw ConfigError("model: r must be positive");
    if (head_w.size() != proj.cols) throw ShapeMismatch("model: head width != r");
}

Gradients Gradients::zeros_like(const ModelParams& p) {
    Gradients g;
    g.encoder.reserve(p.encoder.size());
    for (const auto& l : p.encoder) {
        Layer z;
        z.w = Matrix(l.w.rows, l.w.cols);
        z.b.assign(l.b.size(), 0.0);
        g.encoder.push_back(std::move(z));
    }
    g.proj = Matrix(p.proj.rows, p.proj.cols);
    g.head_w.assign(p.head_w.size(), 0.0);
    g.head_b = 0.0;
    return g;
}

AlignSpace align_space_from_string(const std::string& s) {
    if (s == "projected") return AlignSpace::Projected;
    if (s == "normalized") return AlignSpace::Normalized;
    throw ConfigError("unknown align_space: " + s);
}

OrthoMode ortho_mode_from_string(const std::string& s) {
    if (s == "columns") return OrthoMode::Columns;
    if (s == "rows") return OrthoMode::Rows;
    throw ConfigError("unknown ortho_mode: " + s);
}

WeightNorm weight_norm_from_string(const std::string& s) {
    if (s == "global") return WeightNorm::Global;
    if (s == "batch") return WeightNorm::Batch;
    throw ConfigError("unknown weight_norm: " + s);
}

NormStats norm_stats_from_string(const std::string& s) {
    if (s == "epoch") return NormStats::Epoch;
    if (s == "batch") return NormStats::Batch;
    throw ConfigError("unknown norm_stats: " + s);
}

std::string to_string(AlignSpace v) {
    return v == AlignSpace::Projected ? "projected" : "normalized";
}
std::string to_string(OrthoMode v) { return v == OrthoMode::Columns ? "columns" : "rows"; }
std::string to_string(WeightNorm v) { return v == WeightNorm::Global ? "global" : "batch"; }
std::string to_string(NormStats v) { return v == NormStats::Epoch ? "epoch" : "batch"; }

void TrainConfig::validate() const {
    if (d_h == 0 || r == 0) throw ConfigError("train: d_h and r must be positive");
    if (r > d_h) throw ConfigError("train: r exceeds d_h");
    if (epochs < 1) throw ConfigError("train: epochs must be >= 1");
    if (batch_size < 1) throw ConfigError("train: batch_size must be >= 1");
    if (!(lr > 0.0)) throw ConfigError("train: lr must be positive");
    if (weight_decay < 0.0) throw ConfigError("train: weight_decay must be >= 0");
    if (lambda_attr < 0.0 || lambda_ortho < 0.0)
        throw ConfigError("train: loss weights must be >= 0");
    if (pair_cap < 1) throw ConfigError("train: pair_cap must be >= 1");
    for (auto h : hidden)
        if (h == 0) throw ConfigError("train: hidden width must be positive");
}

ModelParams init_params(std::size_t d_in, const std::vector<std::size_t>& hidden,
                        std::size_t d_h, std::size_t r, std::mt19937_64& rng) {
    if (d_in == 0) throw ConfigError("init_params: d_in must be positive");
    if (r == 0 || r > d_h) throw ConfigError("init_params: need 1 <= r <= d_h");

    std::vector<std::size_t> dims;
    dims.push_back(d_in);
    dims.insert(dims.end(), hidden.begin(), hidden.end());
    dims.push_back(d_h);

    ModelParams p;
    for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
        Layer layer;
        layer.w = Matrix(dims[l + 1], dims[l]);
        layer.b.assign(dims[l + 1], 0.0);
        const double limit = std::sqrt(6.0 / static_cast<double>(dims[l] + dims[l + 1]));
        for (auto& x : layer.w.data) x = (2.0 * runif01(rng) - 1.0) * limit;
        p.encoder.push_back(std::move(layer));
    }

    p.proj = Matrix(d_h, r);
    for (auto& x : p.proj.data) x = rnorm(rng);
    // Modified Gram-Schmidt: start at ortho_loss(U) = 0.
    for (std::size_t j = 0; j < r; ++j) {
        for (std::size_t k = 0; k < j; ++k) {
            double dot = 0.0;
            for (std::size_t i = 0; i < d_h; ++i) dot += p.proj.at(i, k) * p.proj.at(i, j);
            for (std::size_t i = 0; i < d_h; ++i) p.proj.at(i, j) -= dot * p.proj.at(i, k);
        }
        double norm = 0.0;
        for (std::size_t i = 0; i < d_h; ++i) norm += p.proj.at(i, j) * p.proj.at(i, j);
        norm = std::sqrt(norm);
        if (norm < 1e-12) throw ConfigError("init_params: degenerate projection draw");
        for (std::size_t i = 0; i < d_h; ++i) p.proj.at(i, j) /= norm;
    }

    p.head_w.resize(r);
    const double hlimit = std::sqrt(6.0 / static_cast<double>(r + 1));
    for (auto& x : p.head_w) x = (2.0 * runif01(rng) - 1.0) * hlimit;
    p.head_b = 0.0;
    p.validate();
    return p;
}

std::vector<double> encode(const ModelParams& params, const std::vector<double>& x) {
    if (x.size() != params.d_in()) throw ShapeMismatch("encode: input length != d_in");
    std::vector<double> a = x;
    const std::size_t depth = params.encoder.size();
    for (std::size_t l = 0; l < depth; ++l) {
        const Layer& layer = params.encoder[l];
        std::vector<double> z(layer.w.rows);
        for (std::size_t o = 0; o < layer.w.rows; ++o) {
            double acc = layer.b[o];
            for (std::size_t i = 0; i < layer.w.cols; ++i) acc += layer.w.at(o, i) * a[i];
            z[o] = acc;
        }
        if (l + 1 < depth)
            for (auto& v : z) v = std::tanh(v);
        a = std::move(z);
    }
    return a;
}

ForwardResult forward(const ModelParams& params, const std::vector<double>& x,
                      const SubgroupMoments* moments, const SubgroupKey* group) {
    if (x.size() != params.d_in()) throw ShapeMismatch("forward: input length != d_in");

    ForwardResult out;
    out.acts.reserve(params.encoder.size() + 1);
    out.acts.push_back(x);
    const std::size_t depth = params.encoder.size();
    for (std::size_t l = 0; l < depth; ++l) {
        const Layer& layer = params.encoder[l];
        std::vector<double> z(layer.w.rows);
        for (std::size_t o = 0; o < layer.w.rows; ++o) {
            double acc = layer.b[o];
            for (std::size_t i = 0; i < layer.w.cols; ++i)
                acc += layer.w.at(o, i) * out.acts[l][i];
            z[o] = acc;
        }
        if (l + 1 < depth)
            for (auto& v : z) v = std::tanh(v);
        out.acts.push_back(std::move(z));
    }
    out.h = out.acts.back();

    if (moments != nullptr) {
        if (group == nullptr) throw ConfigError("forward: moments given without a group");
        const auto it = moments->mu.find(*group);
        const std::vector<double>& mu =
            it != moments->mu.end() ? it->second : moments->fallback_mu;
        const std::vector<double>& var =
            it != moments->mu.end() ? moments->var.at(*group) : moments->fallback_var;
        if (mu.size() != out.h.size()) throw ShapeMismatch("forward: moments length != d_h");
        out.hhat.resize(out.h.size());
        out.inv_std.resize(out.h.size());
        for (std::size_t i = 0; i < out.h.size(); ++i) {
            out.inv_std[i] = 1.0 / std::sqrt(var[i] + moments->eps);
            out.hhat[i] = (out.h[i] - mu[i]) * out.inv_std[i];
        }
    } else {
        out.hhat = out.h;
    }

    const std::size_t d_h = params.proj.rows;
    const std::size_t r = params.proj.cols;
    out.htilde.assign(r, 0.0);
    for (std::size_t i = 0; i < d_h; ++i)
        for (std::size_t j = 0; j < r; ++j) out.htilde[j] += params.proj.at(i, j) * out.hhat[i];

    double z = params.head_b;
    for (std::size_t j = 0; j < r; ++j) z += params.head_w[j] * out.htilde[j];
    out.z_head = z;
    out.score = sigmoid(z);
    return out;
}

double cosine_loss(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size()) throw ShapeMismatch("cosine_loss: length mismatch");
    double dot = 0.0, na2 = 0.0, nb2 = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        dot += a[i] * b[i];
        na2 += a[i] * a[i];
        nb2 += b[i] * b[i];
    }
    const double na = std::max(std::sqrt(na2), kCosineDelta);
    const double nb = std::max(std::sqrt(nb2), kCosineDelta);
    return 1.0 - dot / (na * nb);
}

namespace {

/// Adds scale * d(cosine_loss)/d(a|b) into ga/gb. The max(norm, delta) guard
/// has zero derivative through the norm when it is active.
void cosine_loss_backward(const std::vector<double>& a, const std::vector<double>& b,
                          double scale, std::vector<double>& ga, std::vector<double>& gb) {
    double dot = 0.0, na2 = 0.0, nb2 = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        dot += a[i] * b[i];
        na2 += a[i] * a[i];
        nb2 += b[i] * b[i];
    }
    const double na = std::sqrt(na2);
    const double nb = std::sqrt(nb2);
    const double nag = std::max(na, kCosineDelta);
    const double nbg = std::max(nb, kCosineDelta);
    const double inv = 1.0 / (nag * nbg);
    for (std::size_t i = 0; i < a.size(); ++i) {
        double da = -b[i] * inv;
        if (na > kCosineDelta) da += dot * a[i] / (nag * nag * nag * nbg);
        double db = -a[i] * inv;
        if (nb > kCosineDelta) db += dot * b[i] / (nbg * nbg * nbg * nag);
        ga[i] += scale * da;
        gb[i] += scale * db;
    }
}

}  // namespace

std::pair<double, std::int64_t> attr_loss(const std::vector<std::vector<double>>& latents,
                                          const std::vector<int>& labels,
                                          const std::vector<SubgroupKey>& groups) {
    if (latents.size() != labels.size() || latents.size() != groups.size())
        throw ShapeMismatch("attr_loss: input lengths differ");
    double sum = 0.0;
    std::int64_t count = 0;
    for (std::size_t i = 0; i < latents.size(); ++i)
        for (std::size_t j = i + 1; j < latents.size(); ++j) {
            if (labels[i] != labels[j] || groups[i] == groups[j]) continue;
            sum += cosine_loss(latents[i], latents[j]);
            ++count;
        }
    if (count == 0) return {0.0, 0};
    return {sum / static_cast<double>(count), count};
}

double ortho_loss(const Matrix& u, OrthoMode mode) {
    double loss = 0.0;
    if (mode == OrthoMode::Columns) {
        for (std::size_t a = 0; a < u.cols; ++a)
            for (std::size_t b = 0; b < u.cols; ++b) {
                double dot = 0.0;
                for (std::size_t i = 0; i < u.rows; ++i) dot += u.at(i, a) * u.at(i, b);
                const double d = dot - (a == b ? 1.0 : 0.0);
                loss += d * d;
            }
    } else {
        for (std::size_t a = 0; a < u.rows; ++a)
            for (std::size_t b = 0; b < u.rows; ++b) {
                double dot = 0.0;
                for (std::size_t j = 0; j < u.cols; ++j) dot += u.at(a, j) * u.at(b, j);
                const double d = dot - (a == b ? 1.0 : 0.0);
                loss += d * d;
            }
    }
    return loss;
}

namespace {

void add_ortho_grad(const Matrix& u, OrthoMode mode, double scale, Matrix& grad) {
    if (mode == OrthoMode::Columns) {
        // d|U^T U - I|_F^2 / dU = 4 U (U^T U - I)
        Matrix g(u.cols, u.cols);
        for (std::size_t a = 0; a < u.cols; ++a)
            for (std::size_t b = 0; b < u.cols; ++b) {
                double dot = 0.0;
                for (std::size_t i = 0; i < u.rows; ++i) dot += u.at(i, a) * u.at(i, b);
                g.at(a, b) = dot - (a == b ? 1.0 : 0.0);
            }
        for (std::size_t i = 0; i < u.rows; ++i)
            for (std::size_t j = 0; j < u.cols; ++j) {
                double acc = 0.0;
                for (std::size_t k = 0; k < u.cols; ++k) acc += u.at(i, k) * g.at(k, j);
                grad.at(i, j) += scale * 4.0 * acc;
            }
    } else {
        // d|U U^T - I|_F^2 / dU = 4 (U U^T - I) U
        Matrix g(u.rows, u.rows);
        for (std::size_t a = 0; a < u.rows; ++a)
            for (std::size_t b = 0; b < u.rows; ++b) {
                double dot = 0.0;
                for (std::size_t j = 0; j < u.cols; ++j) dot += u.at(a, j) * u.at(b, j);
                g.at(a, b) = dot - (a == b ? 1.0 : 0.0);
            }
        for (std::size_t i = 0; i < u.rows; ++i)
            for (std::size_t j = 0; j < u.cols; ++j) {
                double acc = 0.0;
                for (std::size_t k = 0; k < u.rows; ++k) acc += g.at(i, k) * u.at(k, j);
                grad.at(i, j) += scale * 4.0 * acc;
            }
    }
}

/// One shared evaluation for loss and gradients, so the subsampled pair set
/// is identical between the two and finite-difference checks see the exact
/// function the gradients differentiate.
LossBreakdown evaluate_batch(const ModelParams& params, const std::vector<const Sample*>& batch,
                             const std::vector<double>& weights, const SubgroupMoments* moments,
                             const BatchOptions& opts, std::uint64_t pair_seed,
                             Gradients* grads) {
    if (batch.empty()) throw EmptyInput("total_loss: empty batch");
    if (weights.size() != batch.size())
        throw ShapeMismatch("total_loss: weights not aligned with batch");
    params.validate();

    const std::size_t n = batch.size();
    const std::size_t d_h = params.proj.rows;
    const std::size_t r = params.proj.cols;

    std::vector<ForwardResult> fw(n);
    std::vector<SubgroupKey> groups(n);
    for (std::size_t i = 0; i < n; ++i) {
        groups[i] = subgroup_of(*batch[i]);
        fw[i] = forward(params, batch[i]->features, moments, &groups[i]);
    }

    LossBreakdown lb;
    lb.lambda_attr = opts.lambda_attr;
    lb.lambda_ortho = opts.lambda_ortho;

    double cls = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double z = fw[i].z_head;
        const int y = batch[i]->label;
        const double bce = (y == 1) ? softplus(-z) : softplus(z);
        cls += weights[i] * bce;
    }
    lb.cls = cls / static_cast<double>(n);

    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    if (opts.use_attr) {
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j)
                if (batch[i]->label == batch[j]->label && !(groups[i] == groups[j]))
                    pairs.emplace_back(i, j);
        if (static_cast<std::int64_t>(pairs.size()) > opts.pair_cap) {
            auto prng = rng_stream(pair_seed, stream::kPairs);
            const std::size_t cap = static_cast<std::size_t>(opts.pair_cap);
            for (std::size_t k = 0; k < cap; ++k) {
                const std::size_t j =
                    k + static_cast<std::size_t>(rint_below(prng, pairs.size() - k));
                std::swap(pairs[k], pairs[j]);
            }
            pairs.resize(cap);
        }
    }
    lb.n_pairs = static_cast<std::int64_t>(pairs.size());

    const bool projected_align = opts.align_space == AlignSpace::Projected;
    auto align_vec = [&](std::size_t i) -> const std::vector<double>& {
        return projected_align ? fw[i].htilde : fw[i].hhat;
    };
    if (!pairs.empty()) {
        double sum = 0.0;
        for (const auto& [i, j] : pairs) sum += cosine_loss(align_vec(i), align_vec(j));
        lb.attr = sum / static_cast<double>(pairs.size());
    }

    if (opts.use_ortho) lb.ortho = ortho_loss(params.proj, opts.ortho_mode);

    lb.total = lb.cls + opts.lambda_attr * lb.attr + opts.lambda_ortho * lb.ortho;
    if (!std::isfinite(lb.total) || !std::isfinite(lb.cls) || !std::isfinite(lb.attr) ||
        !std::isfinite(lb.ortho))
        throw NonFiniteLoss("total_loss: non-finite loss component", -1, -1);

    if (grads == nullptr) return lb;

    *grads = Gradients::zeros_like(params);
    std::vector<std::vector<double>> d_htilde(n, std::vector<double>(r, 0.0));
    std::vector<std::vector<double>> d_hhat(n, std::vector<double>(d_h, 0.0));

    for (std::size_t i = 0; i < n; ++i) {
        const double dz =
            weights[i] / static_cast<double>(n) * (sigmoid(fw[i].z_head) - batch[i]->label);
        for (std::size_t j = 0; j < r; ++j) {
            grads->head_w[j] += dz * fw[i].htilde[j];
            d_htilde[i][j] = dz * params.head_w[j];
        }
        grads->head_b += dz;
    }

    if (!pairs.empty()) {
        const double scale = opts.lambda_attr / static_cast<double>(pairs.size());
        auto& sink = projected_align ? d_htilde : d_hhat;
        for (const auto& [i, j] : pairs)
            cosine_loss_backward(align_vec(i), align_vec(j), scale, sink[i], sink[j]);
    }

    for (std::size_t i = 0; i < n; ++i) {
        // Projection path: d_hhat += U d_htilde; dU += hhat (x) d_htilde.
        for (std::size_t a = 0; a < d_h; ++a) {
            double acc = 0.0;
            for (std::size_t j = 0; j < r; ++j) {
                acc += params.proj.at(a, j) * d_htilde[i][j];
                grads->proj.at(a, j) += fw[i].hhat[a] * d_htilde[i][j];
            }
            d_hhat[i][a] += acc;
        }

        // Normalization with frozen moments is an elementwise affine map.
        std::vector<double> delta(d_h);
        if (moments != nullptr)
            for (std::size_t a = 0; a < d_h; ++a) delta[a] = d_hhat[i][a] * fw[i].inv_std[a];
        else
            delta = d_hhat[i];

        for (std::size_t l = params.encoder.size(); l-- > 0;) {
            const Layer& layer = params.encoder[l];
            Layer& glayer = grads->encoder[l];
            const std::vector<double>& input = fw[i].acts[l];
            for (std::size_t o = 0; o < layer.w.rows; ++o) {
                glayer.b[o] += delta[o];
                for (std::size_t c = 0; c < layer.w.cols; ++c)
                    glayer.w.at(o, c) += delta[o] * input[c];
            }
            if (l == 0) break;
            std::vector<double> prev(layer.w.cols, 0.0);
            for (std::size_t o = 0; o < layer.w.rows; ++o)
                for (std::size_t c = 0; c < layer.w.cols; ++c)
                    prev[c] += layer.w.at(o, c) * delta[o];
            for (std::size_t c = 0; c < prev.size(); ++c) prev[c] *= 1.0 - input[c] * input[c];
            delta = std::move(prev);
        }
    }

    if (opts.use_ortho) add_ortho_grad(params.proj, opts.ortho_mode, opts.lambda_ortho, grads->proj);

    for (const auto& l : grads->encoder) {
        for (double v : l.w.data)
            if (!std::isfinite(v)) throw NonFiniteGradient("backward: non-finite encoder gradient");
        for (double v : l.b)
            if (!std::isfinite(v)) throw NonFiniteGradient("backward: non-finite bias gradient");
    }
    for (double v : grads->proj.data)
        if (!std::isfinite(v)) throw NonFiniteGradient("backward: non-finite projection gradient");
    for (double v : grads->head_w)
        if (!std::isfinite(v)) throw NonFiniteGradient("backward: non-finite head gradient");
    if (!std::isfinite(grads->head_b))
        throw NonFiniteGradient("backward: non-finite head bias gradient");
    return lb;
}

}  // namespace

LossBreakdown total_loss(const ModelParams& params, const std::vector<const Sample*>& batch,
                         const std::vector<double>& weights, const SubgroupMoments* moments,
                         const BatchOptions& opts, std::uint64_t pair_seed) {
    return evaluate_batch(params, batch, weights, moments, opts, pair_seed, nullptr);
}

LossBreakdown backward(const ModelParams& params, const std::vector<const Sample*>& batch,
                       const std::vector<double>& weights, const SubgroupMoments* moments,
                       const BatchOptions& opts, Gradients& grads, std::uint64_t pair_seed) {
    return evaluate_batch(params, batch, weights, moments, opts, pair_seed, &grads);
}

OptimizerState OptimizerState::init(const ModelParams& p, double lr, double weight_decay) {
    OptimizerState s;
    s.lr = lr;
    s.weight_decay = weight_decay;
    s.m = Gradients::zeros_like(p);
    s.v = Gradients::zeros_like(p);
    return s;
}

namespace {

template <class F>
void visit_tensors(ModelParams& p, const Gradients& g, Gradients& m, Gradients& v, F&& f) {
    for (std::size_t l = 0; l < p.encoder.size(); ++l) {
        auto& pw = p.encoder[l].w.data;
        const auto& gw = g.encoder[l].w.data;
        for (std::size_t i = 0; i < pw.size(); ++i)
            f(pw[i], gw[i], m.encoder[l].w.data[i], v.encoder[l].w.data[i]);
        auto& pb = p.encoder[l].b;
        const auto& gb = g.encoder[l].b;
        for (std::size_t i = 0; i < pb.size(); ++i)
            f(pb[i], gb[i], m.encoder[l].b[i], v.encoder[l].b[i]);
    }
    for (std::size_t i = 0; i < p.proj.data.size(); ++i)
        f(p.proj.data[i], g.proj.data[i], m.proj.data[i], v.proj.data[i]);
    for (std::size_t i = 0; i < p.head_w.size(); ++i)
        f(p.head_w[i], g.head_w[i], m.head_w[i], v.head_w[i]);
    f(p.head_b, g.head_b, m.head_b, v.head_b);
}

}  // namespace

void optimizer_step(OptimizerState& state, ModelParams& params, const Gradients& grads) {
    state.t += 1;
    const double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.t));
    const double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.t));
    visit_tensors(params, grads, state.m, state.v,
                  [&](double& p, double g, double& m, double& v) {
                      m = state.beta1 * m + (1.0 - state.beta1) * g;
                      v = state.beta2 * v + (1.0 - state.beta2) * g * g;
                      const double mhat = m / bc1;
                      const double vhat = v / bc2;
                      p -= state.lr * state.weight_decay * p;
                      p -= state.lr * mhat / (std::sqrt(vhat) + state.eps);
                  });
}

namespace {

SubgroupMoments fit_latent_moments(const ModelParams& params, const Dataset& ds,
                                   const std::vector<SubgroupKey>& groups) {
    std::vector<std::vector<double>> latents;
    latents.reserve(ds.samples.size());
    for (const auto& s : ds.samples) latents.push_back(encode(params, s.features));
    return fit_moments(latents, groups);
}

}  // namespace

TrainResult train(const Dataset& ds, const TrainConfig& config) {
    config.validate();
    ds.validate();
    bool has0 = false, has1 = false;
    for (const auto& s : ds.samples) (s.label == 1 ? has1 : has0) = true;
    if (!has0 || !has1) throw DegenerateLabels("train: needs both labels present");

    const std::size_t n = ds.samples.size();
    TrainResult out;
    out.config = config;

    std::vector<double> base_w(n, 1.0);
    if (config.reweight) {
        out.propensity = fit_propensity(ds, config.joint_propensity);
        const bool global = config.weight_norm == WeightNorm::Global;
        for (std::size_t i = 0; i < n; ++i)
            base_w[i] = weight_of(out.propensity, ds.samples[i], global);
    }

    auto init_rng = rng_stream(config.seed, stream::kInit);
    out.params = init_params(ds.d_in, config.hidden, config.d_h, config.r, init_rng);
    OptimizerState opt = OptimizerState::init(out.params, config.lr, config.weight_decay);

    BatchOptions bopts;
    bopts.lambda_attr = config.lambda_attr;
    bopts.lambda_ortho = config.lambda_ortho;
    bopts.use_attr = config.attr;
    bopts.use_ortho = config.ortho;
    bopts.align_space = config.align_space;
    bopts.ortho_mode = config.ortho_mode;
    bopts.pair_cap = config.pair_cap;

    std::vector<SubgroupKey> groups(n);
    for (std::size_t i = 0; i < n; ++i) groups[i] = subgroup_of(ds.samples[i]);

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    auto shuffle_rng = rng_stream(config.seed, stream::kShuffle);

    if (config.normalize) {
        out.moments = fit_latent_moments(out.params, ds, groups);
        out.has_moments = true;
    }

    Gradients grads = Gradients::zeros_like(out.params);
    const std::size_t bsz = static_cast<std::size_t>(config.batch_size);

    for (std::int64_t epoch = 0; epoch < config.epochs; ++epoch) {
        shuffle_inplace(order, shuffle_rng);

        double ep_cls = 0.0, ep_attr = 0.0, ep_ortho = 0.0, ep_total = 0.0;
        std::int64_t batch_index = 0;
        for (std::size_t start = 0; start < n; start += bsz, ++batch_index) {
            const std::size_t stop = std::min(start + bsz, n);
            std::vector<const Sample*> batch;
            std::vector<double> w;
            batch.reserve(stop - start);
            w.reserve(stop - start);
            for (std::size_t k = start; k < stop; ++k) {
                batch.push_back(&ds.samples[order[k]]);
                w.push_back(base_w[order[k]]);
            }
            if (config.reweight && config.weight_norm == WeightNorm::Batch) {
                double mean = 0.0;
                for (double x : w) mean += x;
                mean /= static_cast<double>(w.size());
                for (double& x : w) x /= mean;
            }

            SubgroupMoments batch_moments;
            const SubgroupMoments* mom = nullptr;
            if (config.normalize) {
                if (config.norm_stats == NormStats::Batch) {
                    std::vector<std::vector<double>> latents;
                    std::vector<SubgroupKey> bg;
                    latents.reserve(batch.size());
                    bg.reserve(batch.size());
                    for (const Sample* s : batch) {
                        latents.push_back(encode(out.params, s->features));
                        bg.push_back(subgroup_of(*s));
                    }
                    batch_moments = fit_moments(latents, bg);
                    mom = &batch_moments;
                } else {
                    mom = &out.moments;
                }
            }

            const std::uint64_t pair_seed =
                mix64(mix64(config.seed ^ stream::kPairs) ^
                      static_cast<std::uint64_t>(epoch)) ^
                static_cast<std::uint64_t>(batch_index);

            LossBreakdown lb;
            try {
                lb = backward(out.params, batch, w, mom, bopts, grads, pair_seed);
            } catch (const NonFiniteLoss&) {
                throw NonFiniteLoss("train: loss diverged", static_cast<int>(epoch),
                                    static_cast<int>(batch_index));
            }
            optimizer_step(opt, out.params, grads);

            const double frac = static_cast<double>(batch.size()) / static_cast<double>(n);
            ep_cls += lb.cls * frac;
            ep_attr += lb.attr * frac;
            ep_ortho += lb.ortho * frac;
            ep_total += lb.total * frac;
        }

        // Fresh statistics for scoring; they also serve the next epoch.
        if (config.normalize) out.moments = fit_latent_moments(out.params, ds, groups);

        std::vector<double> scores(n);
        std::vector<int> labels(n);
        const SubgroupMoments* eval_mom = config.normalize ? &out.moments : nullptr;
        for (std::size_t i = 0; i < n; ++i) {
            scores[i] = forward(out.params, ds.samples[i].features, eval_mom, &groups[i]).score;
            labels[i] = ds.samples[i].label;
        }

        EpochStats st;
        st.epoch = epoch;
        st.cls = ep_cls;
        st.attr = ep_attr;
        st.ortho = ep_ortho;
        st.total = ep_total;
        st.train_auc = auc(scores, labels);
        out.history.push_back(st);
    }

    return out;
}

std::vector<double> score_dataset(const TrainResult& model, const Dataset& ds) {
    std::vector<double> scores;
    scores.reserve(ds.samples.size());
    const SubgroupMoments* mom = model.has_moments ? &model.moments : nullptr;
    for (const auto& s : ds.samples) {
        const SubgroupKey g = subgroup_of(s);
        scores.push_back(forward(model.params, s.features, mom, &g).score);
    }
    return scores;
}

}  // namespace daid
