#include "camforge/toytrain.hpp"

#include "camforge/rng.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>

namespace camforge::train {

namespace {

MatrixXd gaussian_matrix(Rng& rng, int rows, int cols, double scale) {
    MatrixXd m(rows, cols);
    for (int c = 0; c < cols; ++c)
        for (int r = 0; r < rows; ++r) m(r, c) = scale * rng.normal();
    return m;
}

}  // namespace

NoiseSchedule NoiseSchedule::linear(int T, double beta_start, double beta_end) {
    NoiseSchedule s;
    s.T = T;
    s.betas.resize(T);
    s.alphas.resize(T);
    s.alpha_bars.resize(T);
    double prod = 1.0;
    for (int t = 0; t < T; ++t) {
        const double beta = T == 1 ? beta_start
                                   : beta_start + (beta_end - beta_start) * t / (T - 1);
        s.betas[t] = beta;
        s.alphas[t] = 1.0 - beta;
        prod *= s.alphas[t];
        s.alpha_bars[t] = prod;
    }
    s.validate();
    return s;
}

void NoiseSchedule::validate() const {
    if (T < 1) throw std::invalid_argument("schedule: T must be >= 1");
    for (int t = 0; t < T; ++t) {
        if (!(betas[t] > 0.0 && betas[t] < 1.0))
            throw std::invalid_argument("schedule: betas must lie in (0, 1)");
        if (t > 0 && !(alpha_bars[t] < alpha_bars[t - 1]))
            throw std::invalid_argument("schedule: alpha_bars must strictly decrease");
    }
}

int CondLayout::motion_id(const std::string& name) const {
    for (size_t i = 0; i < motion_vocab.size(); ++i)
        if (motion_vocab[i] == name) return static_cast<int>(i);
    throw std::invalid_argument("motion not in vocabulary: " + name);
}

Denoiser Denoiser::create(int video_dim, int temb_dim, int cond_dim, int hidden,
                          std::uint64_t seed) {
    Denoiser net;
    net.video_dim = video_dim;
    net.temb_dim = temb_dim;
    net.cond_dim = cond_dim;
    net.hidden = hidden;
    Rng rng(derive_seed(seed, 0xD40, 0));
    // Per-block fan-in scaling: the flattened video block would otherwise
    // drown the handful of time/condition inputs in the hidden activations.
    net.W1.resize(hidden, net.in_dim());
    net.W1.leftCols(video_dim) =
        gaussian_matrix(rng, hidden, video_dim, 0.1 / std::sqrt(video_dim));
    net.W1.middleCols(video_dim, temb_dim) =
        gaussian_matrix(rng, hidden, temb_dim, 0.4 / std::sqrt(temb_dim));
    net.W1.rightCols(cond_dim) =
        gaussian_matrix(rng, hidden, cond_dim, 0.7 / std::sqrt(cond_dim));
    net.b1 = VectorXd::Zero(hidden);
    net.W2 = gaussian_matrix(rng, video_dim, hidden, 1.0 / std::sqrt(hidden));
    net.b2 = VectorXd::Zero(video_dim);
    return net;
}

Adapter Adapter::create(AdapterRole role, const Denoiser& net, int rank, double alpha,
                        std::uint64_t seed) {
    if (rank < 1) throw RankMismatch("adapter rank must be >= 1");
    Adapter a;
    a.role = role;
    a.rank = rank;
    a.alpha = alpha > 0 ? alpha : rank;
    Rng rng(derive_seed(seed, 0xAD, static_cast<std::uint64_t>(role)));
    a.B1 = MatrixXd::Zero(net.hidden, rank);
    a.A1 = gaussian_matrix(rng, rank, net.in_dim(), 1.0 / std::sqrt(net.in_dim()));
    a.B2 = MatrixXd::Zero(net.video_dim, rank);
    a.A2 = gaussian_matrix(rng, rank, net.hidden, 1.0 / std::sqrt(net.hidden));
    return a;
}

void Adapter::check_compatible(const Denoiser& net) const {
    if (B1.rows() != net.hidden || A1.cols() != net.in_dim() || B2.rows() != net.video_dim ||
        A2.cols() != net.hidden || B1.cols() != rank || A1.rows() != rank)
        throw RankMismatch("adapter shapes incompatible with the model");
}

TrajectoryEncoder TrajectoryEncoder::create(int enc_dim, int feat_dim, std::uint64_t seed) {
    TrajectoryEncoder e;
    Rng rng(derive_seed(seed, 0xE2C, 0));
    e.W = gaussian_matrix(rng, enc_dim, feat_dim, 1.0 / std::sqrt(feat_dim));
    e.b = VectorXd::Zero(enc_dim);
    return e;
}

const char* to_string(Paradigm p) { return p == Paradigm::text ? "text" : "trajectory"; }

Paradigm paradigm_from_string(const std::string& s) {
    if (s == "text") return Paradigm::text;
    if (s == "trajectory") return Paradigm::trajectory;
    throw std::invalid_argument("unknown paradigm: " + s);
}

VectorXd time_embedding(int t, int dim) {
    VectorXd e(dim);
    const int half = dim / 2;
    for (int i = 0; i < half; ++i) {
        const double w = std::exp(-std::log(10000.0) * i / half);
        e[2 * i] = std::sin(t * w);
        e[2 * i + 1] = std::cos(t * w);
    }
    if (dim % 2 == 1) e[dim - 1] = 0.0;
    return e;
}

VectorXd make_cond_text(const CondLayout& layout, int motion_id, int content_id,
                        bool virtual_bit) {
    VectorXd slot = VectorXd::Zero(layout.n_motion);
    if (motion_id >= 0) {
        if (motion_id >= layout.n_motion)
            throw std::invalid_argument("motion id outside the condition layout");
        slot[motion_id] = 1.0;
    }
    return make_cond_slot(layout, slot, content_id, virtual_bit);
}

VectorXd make_cond_slot(const CondLayout& layout, const VectorXd& motion_slot, int content_id,
                        bool virtual_bit) {
    if (motion_slot.size() != layout.n_motion)
        throw std::invalid_argument("motion slot size mismatch");
    if (content_id < 0 || content_id >= layout.n_content)
        throw std::invalid_argument("content id outside the condition layout");
    VectorXd cond = VectorXd::Zero(layout.cond_dim());
    cond.head(layout.n_motion) = motion_slot;
    cond[layout.n_motion + content_id] = 1.0;
    cond[layout.cond_dim() - 1] = virtual_bit ? 1.0 : 0.0;
    return cond;
}

VectorXd forward_noise(const VectorXd& x0, int t, const VectorXd& eps,
                       const NoiseSchedule& sched) {
    if (x0.size() != eps.size()) throw ShapeMismatchError("forward_noise: shape mismatch");
    if (t < 0 || t >= sched.T) throw std::invalid_argument("forward_noise: t outside [0, T)");
    return sched.sqrt_ab(t) * x0 + sched.sqrt_1mab(t) * eps;
}

VectorXd predict_x0(const VectorXd& x_t, const VectorXd& eps_hat, int t,
                    const NoiseSchedule& sched) {
    if (t < 0 || t >= sched.T) throw std::invalid_argument("predict_x0: t outside [0, T)");
    return (x_t - sched.sqrt_1mab(t) * eps_hat) / sched.sqrt_ab(t);
}

namespace {

struct ForwardCache {
    MatrixXd U;       // in_dim x B
    MatrixXd Z1;      // hidden x B
    MatrixXd H;       // hidden x B
    MatrixXd Y;       // video_dim x B (x0-space output)
    MatrixXd EpsHat;  // video_dim x B
    VectorXd sa, s1;  // per-sample schedule coefficients
    std::vector<MatrixXd> V1, V2;  // per-adapter A1*U, A2*H
};

ForwardCache forward_batch(const DiffusionModel& model,
                           const std::vector<const Adapter*>& adapters,
                           const TrajectoryEncoder* encoder, const Batch& batch) {
    const Denoiser& net = model.net;
    const int B = static_cast<int>(batch.t.size());
    const int D = net.video_dim;
    for (const Adapter* a : adapters) a->check_compatible(net);
    if (batch.x0.rows() != D || batch.eps.rows() != D)
        throw ShapeMismatchError("forward: video dimension mismatch");

    ForwardCache cache;
    cache.sa.resize(B);
    cache.s1.resize(B);

    MatrixXd cond = batch.cond;
    if (encoder != nullptr) {
        if (encoder->enc_dim() != model.layout.n_motion)
            throw ShapeMismatchError("encoder output does not fit the motion slot");
        cond.topRows(model.layout.n_motion) +=
            (encoder->W * batch.feats).colwise() + encoder->b;
    }

    cache.U.resize(net.in_dim(), B);
    for (int s = 0; s < B; ++s) {
        const int t = batch.t[s];
        cache.sa[s] = model.sched.sqrt_ab(t);
        cache.s1[s] = model.sched.sqrt_1mab(t);
        cache.U.col(s).head(D) = cache.sa[s] * batch.x0.col(s) + cache.s1[s] * batch.eps.col(s);
        cache.U.col(s).segment(D, net.temb_dim) = time_embedding(t, net.temb_dim);
        cache.U.col(s).tail(net.cond_dim) = cond.col(s);
    }

    cache.Z1 = (net.W1 * cache.U).colwise() + net.b1;
    for (const Adapter* a : adapters) {
        cache.V1.push_back(a->A1 * cache.U);
        cache.Z1 += a->scale() * (a->B1 * cache.V1.back());
    }
    cache.H = net.linear_activation ? cache.Z1 : cache.Z1.array().tanh().matrix();

    cache.Y = (net.W2 * cache.H).colwise() + net.b2;
    for (size_t i = 0; i < adapters.size(); ++i) {
        cache.V2.push_back(adapters[i]->A2 * cache.H);
        cache.Y += adapters[i]->scale() * (adapters[i]->B2 * cache.V2.back());
    }

    cache.EpsHat.resize(D, B);
    for (int s = 0; s < B; ++s)
        cache.EpsHat.col(s) =
            (cache.U.col(s).head(D) - cache.sa[s] * cache.Y.col(s)) / cache.s1[s];
    return cache;
}

LossParts loss_from_cache(const DiffusionModel& model, const Batch& batch,
                          const ForwardCache& cache, double lambda, double flow_delta) {
    const int B = static_cast<int>(batch.t.size());
    const int D = model.net.video_dim;
    const int K = model.dims.K;
    const int F = model.dims.frame();

    LossParts parts;
    for (int s = 0; s < B; ++s) {
        // Per-step weight (1-ab)/ab flattens the noise objective to unit
        // scale in x0 space; without it the epsilon MSE carries SNR weights
        // spanning four orders of magnitude across t, which starves the
        // high-noise steps that ancestral sampling bootstraps from.
        const double w = (cache.s1[s] * cache.s1[s]) / (cache.sa[s] * cache.sa[s]);
        parts.diffusion += w * (cache.EpsHat.col(s) - batch.eps.col(s)).squaredNorm() / D;
    }
    parts.diffusion /= B;

    if (lambda != 0.0 && K >= 2) {
        for (int s = 0; s < B; ++s) {
            double sample_flow = 0.0;
            for (int k = 0; k + 1 < K; ++k) {
                double gap = 0.0;
                for (int p = 0; p < F; ++p) {
                    const double vy = cache.Y((k + 1) * F + p, s) - cache.Y(k * F + p, s);
                    const double vx = batch.x0((k + 1) * F + p, s) - batch.x0(k * F + p, s);
                    const double v = vy - vx;
                    gap += std::sqrt(v * v + flow_delta * flow_delta);
                }
                sample_flow += gap / F;
            }
            parts.flow += sample_flow / (K - 1);
        }
        parts.flow /= B;
    }
    parts.total = parts.diffusion + lambda * parts.flow;
    return parts;
}

struct GradRequest {
    bool base = false;
    std::vector<bool> adapters;  // parallel to the active adapter list
    bool encoder = false;
};

struct Grads {
    MatrixXd W1, W2;
    VectorXd b1, b2;
    struct AdapterGrads {
        MatrixXd B1, A1, B2, A2;
    };
    std::vector<AdapterGrads> adapters;
    MatrixXd We;
    VectorXd be;
};

Grads backward_batch(const DiffusionModel& model, const std::vector<const Adapter*>& adapters,
                     const TrajectoryEncoder* encoder, const Batch& batch,
                     const ForwardCache& cache, double lambda, double flow_delta,
                     const GradRequest& req) {
    const Denoiser& net = model.net;
    const int B = static_cast<int>(batch.t.size());
    const int D = net.video_dim;
    const int K = model.dims.K;
    const int F = model.dims.frame();

    // d(total)/dY: weighted diffusion term through the eps conversion, plus
    // the flow term.
    MatrixXd G_Y(D, B);
    for (int s = 0; s < B; ++s) {
        const double w = (cache.s1[s] * cache.s1[s]) / (cache.sa[s] * cache.sa[s]);
        const double c = -w * (cache.sa[s] / cache.s1[s]) * 2.0 / (static_cast<double>(D) * B);
        G_Y.col(s) = c * (cache.EpsHat.col(s) - batch.eps.col(s));
    }
    if (lambda != 0.0 && K >= 2) {
        const double w = lambda / (static_cast<double>(B) * (K - 1) * F);
        for (int s = 0; s < B; ++s) {
            for (int k = 0; k + 1 < K; ++k) {
                for (int p = 0; p < F; ++p) {
                    const double vy = cache.Y((k + 1) * F + p, s) - cache.Y(k * F + p, s);
                    const double vx = batch.x0((k + 1) * F + p, s) - batch.x0(k * F + p, s);
                    const double v = vy - vx;
                    const double g = w * v / std::sqrt(v * v + flow_delta * flow_delta);
                    G_Y((k + 1) * F + p, s) += g;
                    G_Y(k * F + p, s) -= g;
                }
            }
        }
    }

    Grads grads;
    grads.adapters.resize(adapters.size());

    if (req.base) {
        grads.W2 = G_Y * cache.H.transpose();
        grads.b2 = G_Y.rowwise().sum();
    }
    for (size_t i = 0; i < adapters.size(); ++i) {
        if (i < req.adapters.size() && req.adapters[i]) {
            const double sc = adapters[i]->scale();
            grads.adapters[i].B2 = sc * (G_Y * cache.V2[i].transpose());
            grads.adapters[i].A2 =
                sc * ((adapters[i]->B2.transpose() * G_Y) * cache.H.transpose());
        }
    }

    MatrixXd G_H = net.W2.transpose() * G_Y;
    for (const Adapter* a : adapters)
        G_H += a->scale() * (a->A2.transpose() * (a->B2.transpose() * G_Y));

    MatrixXd G_Z1 = net.linear_activation
                        ? std::move(G_H)
                        : (G_H.array() * (1.0 - cache.H.array().square())).matrix();

    if (req.base) {
        grads.W1 = G_Z1 * cache.U.transpose();
        grads.b1 = G_Z1.rowwise().sum();
    }
    for (size_t i = 0; i < adapters.size(); ++i) {
        if (i < req.adapters.size() && req.adapters[i]) {
            const double sc = adapters[i]->scale();
            grads.adapters[i].B1 = sc * (G_Z1 * cache.V1[i].transpose());
            grads.adapters[i].A1 =
                sc * ((adapters[i]->B1.transpose() * G_Z1) * cache.U.transpose());
        }
    }

    if (req.encoder && encoder != nullptr) {
        MatrixXd G_U = net.W1.transpose() * G_Z1;
        for (const Adapter* a : adapters)
            G_U += a->scale() * (a->A1.transpose() * (a->B1.transpose() * G_Z1));
        const MatrixXd G_enc =
            G_U.middleRows(D + net.temb_dim, model.layout.n_motion);
        grads.We = G_enc * batch.feats.transpose();
        grads.be = G_enc.rowwise().sum();
    }
    return grads;
}

double grads_squared_norm(const Grads& g, const GradRequest& req) {
    double n = 0.0;
    if (req.base)
        n += g.W1.squaredNorm() + g.b1.squaredNorm() + g.W2.squaredNorm() + g.b2.squaredNorm();
    for (size_t i = 0; i < g.adapters.size(); ++i)
        if (i < req.adapters.size() && req.adapters[i])
            n += g.adapters[i].B1.squaredNorm() + g.adapters[i].A1.squaredNorm() +
                 g.adapters[i].B2.squaredNorm() + g.adapters[i].A2.squaredNorm();
    if (req.encoder) n += g.We.squaredNorm() + g.be.squaredNorm();
    return n;
}

}  // namespace

VectorXd predict_eps(const DiffusionModel& model, const std::vector<const Adapter*>& adapters,
                     const VectorXd& cond, const VectorXd& x_t, int t) {
    if (t < 0 || t >= model.sched.T)
        throw std::invalid_argument("predict_eps: t outside [0, T)");
    if (x_t.size() != model.net.video_dim)
        throw ShapeMismatchError("predict_eps: video dimension mismatch");
    if (cond.size() != model.net.cond_dim)
        throw ShapeMismatchError("predict_eps: condition dimension mismatch");

    // Single-sample forward through the batched path; the batch carries x_t
    // directly by passing x0 = x_t and eps = 0.
    Batch batch;
    batch.x0 = x_t / model.sched.sqrt_ab(t);
    batch.eps = MatrixXd::Zero(model.net.video_dim, 1);
    batch.t = VectorXi::Constant(1, t);
    batch.cond = cond;
    const ForwardCache cache = forward_batch(model, adapters, nullptr, batch);
    return cache.EpsHat.col(0);
}

LossParts total_loss(const DiffusionModel& model, const std::vector<const Adapter*>& adapters,
                     const TrajectoryEncoder* encoder, const Batch& batch, double lambda,
                     double flow_delta) {
    const ForwardCache cache = forward_batch(model, adapters, encoder, batch);
    return loss_from_cache(model, batch, cache, lambda, flow_delta);
}

namespace {

Batch draw_batch(const DiffusionModel& model, const TrainSet& data, const TrainConfig& cfg,
                 Paradigm paradigm, Rng& rng) {
    const int B = cfg.batch;
    const int D = model.net.video_dim;
    const int N = static_cast<int>(data.samples.size());

    Batch batch;
    batch.x0.resize(D, B);
    batch.eps.resize(D, B);
    batch.t.resize(B);
    batch.cond.resize(model.layout.cond_dim(), B);
    const int t_lo = std::clamp(cfg.t_min, 0, model.sched.T - 1);

    int feat_dim = 0;
    if (paradigm == Paradigm::trajectory) {
        feat_dim = static_cast<int>(data.samples[0].traj_feat.size());
        batch.feats.resize(feat_dim, B);
    }

    for (int s = 0; s < B; ++s) {
        const auto& sample = data.samples[rng.uniform_index(static_cast<std::uint64_t>(N))];
        if (sample.x0.size() != D)
            throw ShapeMismatchError("training sample does not match the model video size");
        batch.x0.col(s) = sample.x0;
        for (int j = 0; j < D; ++j) batch.eps(j, s) = rng.normal();
        batch.t[s] = t_lo + static_cast<int>(rng.uniform_index(
                                static_cast<std::uint64_t>(model.sched.T - t_lo)));
        if (paradigm == Paradigm::text) {
            batch.cond.col(s) = make_cond_text(model.layout, sample.motion_id,
                                               sample.content_id, sample.virtual_bit);
        } else {
            batch.cond.col(s) = make_cond_slot(model.layout,
                                               VectorXd::Zero(model.layout.n_motion),
                                               sample.content_id, sample.virtual_bit);
            if (sample.traj_feat.size() != feat_dim)
                throw ShapeMismatchError("trajectory feature size differs across samples");
            batch.feats.col(s) = sample.traj_feat;
        }
    }
    return batch;
}

struct TrainableRefs {
    std::vector<std::pair<double*, const double*>> blocks;  // param data, grad data
    std::vector<size_t> sizes;

    void add(MatrixXd& param, const MatrixXd& grad) {
        blocks.emplace_back(param.data(), grad.data());
        sizes.push_back(static_cast<size_t>(param.size()));
    }
    void add(VectorXd& param, const VectorXd& grad) {
        blocks.emplace_back(param.data(), grad.data());
        sizes.push_back(static_cast<size_t>(param.size()));
    }
    void apply(double lr) {
        for (size_t b = 0; b < blocks.size(); ++b) {
            double* p = blocks[b].first;
            const double* g = blocks[b].second;
            for (size_t i = 0; i < sizes[b]; ++i) p[i] -= lr * g[i];
        }
    }
};

// Shared SGD loop: warm-up, global-norm clip, per-step log. When train_base
// is set, model.net is updated in place; otherwise only the trainable
// adapter/encoder move and the model stays untouched.
TrainResult run_training(DiffusionModel& model, bool train_base_weights,
                         const std::vector<const Adapter*>& frozen_adapters,
                         Adapter* trainable_adapter, const TrajectoryEncoder* frozen_encoder,
                         TrajectoryEncoder* trainable_encoder, const TrainSet& data,
                         const TrainConfig& cfg, Paradigm paradigm, double lambda) {
    if (data.empty()) throw EmptyDataset("training set is empty");

    Rng rng(derive_seed(cfg.seed, 0x7121A1, 0));
    TrainResult result;

    std::vector<const Adapter*> adapters = frozen_adapters;
    GradRequest req;
    req.base = train_base_weights;
    req.adapters.assign(adapters.size(), false);
    if (trainable_adapter != nullptr) {
        adapters.push_back(trainable_adapter);
        req.adapters.push_back(true);
    }
    const TrajectoryEncoder* encoder =
        trainable_encoder != nullptr ? trainable_encoder : frozen_encoder;
    req.encoder = trainable_encoder != nullptr;

    const int warmup = std::max(1, static_cast<int>(cfg.warmup_frac * cfg.steps));
    for (int step = 0; step < cfg.steps; ++step) {
        const Batch batch = draw_batch(model, data, cfg, paradigm, rng);
        const ForwardCache cache = forward_batch(model, adapters, encoder, batch);
        const LossParts parts = loss_from_cache(model, batch, cache, lambda, cfg.flow_delta);
        const Grads grads =
            backward_batch(model, adapters, encoder, batch, cache, lambda, cfg.flow_delta, req);

        double lr = cfg.lr * std::min(1.0, static_cast<double>(step + 1) / warmup);
        if (cfg.grad_clip > 0) {
            const double norm = std::sqrt(grads_squared_norm(grads, req));
            if (norm > cfg.grad_clip) lr *= cfg.grad_clip / norm;
        }

        TrainableRefs refs;
        if (train_base_weights) {
            refs.add(model.net.W1, grads.W1);
            refs.add(model.net.b1, grads.b1);
            refs.add(model.net.W2, grads.W2);
            refs.add(model.net.b2, grads.b2);
        }
        if (trainable_adapter != nullptr) {
            const auto& ag = grads.adapters.back();
            refs.add(trainable_adapter->B1, ag.B1);
            refs.add(trainable_adapter->A1, ag.A1);
            refs.add(trainable_adapter->B2, ag.B2);
            refs.add(trainable_adapter->A2, ag.A2);
        }
        if (trainable_encoder != nullptr) {
            refs.add(trainable_encoder->W, grads.We);
            refs.add(trainable_encoder->b, grads.be);
        }
        refs.apply(lr);

        result.log.push_back({step, parts.total, parts.diffusion, parts.flow});
    }
    return result;
}

}  // namespace

TrainResult train_base(DiffusionModel& model, TrajectoryEncoder* encoder, const TrainSet& data,
                       const TrainConfig& cfg, Paradigm paradigm) {
    if (paradigm == Paradigm::trajectory && encoder == nullptr)
        throw std::invalid_argument("trajectory paradigm base training needs an encoder");
    return run_training(model, true, {}, nullptr, nullptr,
                        paradigm == Paradigm::trajectory ? encoder : nullptr, data, cfg,
                        paradigm, 0.0);
}

Adapter train_appearance(const DiffusionModel& model, const TrajectoryEncoder* encoder,
                         const TrainSet& x_a, const TrainConfig& cfg, Paradigm paradigm,
                         TrainResult* result) {
    if (x_a.empty()) throw EmptyDataset("appearance training set is empty");
    Adapter adapter = Adapter::create(AdapterRole::appearance, model.net, cfg.rank,
                                      cfg.adapter_alpha, cfg.seed);
    DiffusionModel local = model;  // base stays frozen; train only the adapter
    TrainResult log =
        run_training(local, false, {}, &adapter, encoder, nullptr, x_a, cfg, paradigm, 0.0);
    if (result != nullptr) *result = std::move(log);
    return adapter;
}

Adapter train_camera_text(const DiffusionModel& model, const Adapter* appearance,
                          const TrainSet& x_c, const TrainConfig& cfg, TrainResult* result) {
    if (x_c.empty()) throw EmptyDataset("camera training set is empty");
    if (appearance == nullptr && !cfg.ablate_appearance)
        throw MissingAppearanceAdapter("camera step requires the appearance adapter");

    Adapter adapter =
        Adapter::create(AdapterRole::camera, model.net, cfg.rank, cfg.adapter_alpha, cfg.seed);
    std::vector<const Adapter*> frozen;
    if (appearance != nullptr && !cfg.ablate_appearance) frozen.push_back(appearance);
    DiffusionModel local = model;
    TrainResult log = run_training(local, false, frozen, &adapter, nullptr, nullptr, x_c, cfg,
                                   Paradigm::text, cfg.lambda);
    if (result != nullptr) *result = std::move(log);
    return adapter;
}

TrajectoryEncoder train_camera_trajectory(const DiffusionModel& model, const Adapter* appearance,
                                          const TrajectoryEncoder& encoder, const TrainSet& x_c,
                                          const TrainConfig& cfg, TrainResult* result) {
    if (x_c.empty()) throw EmptyDataset("camera training set is empty");
    if (appearance == nullptr && !cfg.ablate_appearance)
        throw MissingAppearanceAdapter("camera step requires the appearance adapter");

    TrajectoryEncoder tuned = encoder;
    std::vector<const Adapter*> frozen;
    if (appearance != nullptr && !cfg.ablate_appearance) frozen.push_back(appearance);
    DiffusionModel local = model;
    TrainResult log = run_training(local, false, frozen, nullptr, nullptr, &tuned, x_c, cfg,
                                   Paradigm::trajectory, cfg.lambda);
    if (result != nullptr) *result = std::move(log);
    return tuned;
}

VectorXd sample(const DiffusionModel& model, const std::vector<const Adapter*>& adapters,
                const VectorXd& cond, std::uint64_t seed) {
    const int D = model.net.video_dim;
    Rng rng(derive_seed(seed, 0x5A3, 0));
    VectorXd x(D);
    for (int i = 0; i < D; ++i) x[i] = rng.normal();

    for (int t = model.sched.T - 1; t >= 0; --t) {
        const VectorXd eps_hat = predict_eps(model, adapters, cond, x, t);
        // Clamp the x0 estimate to the training data range; keeps the
        // ancestral chain from amplifying any learned input passthrough.
        const VectorXd x0_hat =
            predict_x0(x, eps_hat, t, model.sched).cwiseMax(-1.0).cwiseMin(1.0);
        if (t == 0) {
            x = x0_hat;
            break;
        }
        const double ab = model.sched.alpha_bars[t];
        const double ab_prev = model.sched.alpha_bars[t - 1];
        const double beta = model.sched.betas[t];
        const double alpha = model.sched.alphas[t];
        const double coef_x0 = std::sqrt(ab_prev) * beta / (1.0 - ab);
        const double coef_xt = std::sqrt(alpha) * (1.0 - ab_prev) / (1.0 - ab);
        const double sigma = std::sqrt(beta * (1.0 - ab_prev) / (1.0 - ab));
        VectorXd z(D);
        for (int i = 0; i < D; ++i) z[i] = rng.normal();
        x = coef_x0 * x0_hat + coef_xt * x + sigma * z;
    }
    return x;
}

render::VideoTensor to_video(const VectorXd& flat, const VideoDims& dims, double fps) {
    if (flat.size() != dims.flat())
        throw ShapeMismatchError("to_video: flat size does not match dims");
    render::VideoTensor v = render::VideoTensor::zeros(dims.K, dims.H, dims.W, dims.C, fps);
    for (int i = 0; i < flat.size(); ++i) v.data[static_cast<size_t>(i)] =
        static_cast<float>(flat[i]);
    return v;
}

VectorXd flatten_video(const render::VideoTensor& video) {
    VectorXd flat(static_cast<Eigen::Index>(video.data.size()));
    for (size_t i = 0; i < video.data.size(); ++i) flat[static_cast<Eigen::Index>(i)] =
        static_cast<double>(video.data[i]);
    return flat;
}

GradCheckResult grad_check(DiffusionModel model, std::vector<Adapter> adapters,
                           std::optional<TrajectoryEncoder> encoder, Batch probe, double lambda,
                           double flow_delta, double h, bool check_base) {
    std::vector<const Adapter*> active;
    for (const auto& a : adapters) active.push_back(&a);
    const TrajectoryEncoder* enc = encoder.has_value() ? &*encoder : nullptr;

    GradRequest req;
    req.base = check_base;
    req.adapters.assign(adapters.size(), true);
    req.encoder = encoder.has_value();

    const ForwardCache cache = forward_batch(model, active, enc, probe);
    const Grads grads =
        backward_batch(model, active, enc, probe, cache, lambda, flow_delta, req);

    auto loss_now = [&]() {
        return total_loss(model, active, enc, probe, lambda, flow_delta).total;
    };

    GradCheckResult result;
    auto check_block = [&](double* param, const double* grad, size_t n) {
        for (size_t i = 0; i < n; ++i) {
            const double saved = param[i];
            param[i] = saved + h;
            const double lp = loss_now();
            param[i] = saved - h;
            const double lm = loss_now();
            param[i] = saved;
            const double g_fd = (lp - lm) / (2.0 * h);
            const double ga = grad[i];
            const double denom = std::max({1.0, std::abs(ga), std::abs(g_fd)});
            result.max_rel_err = std::max(result.max_rel_err, std::abs(ga - g_fd) / denom);
            ++result.n_checked;
        }
    };

    if (check_base) {
        check_block(model.net.W1.data(), grads.W1.data(), static_cast<size_t>(model.net.W1.size()));
        check_block(model.net.b1.data(), grads.b1.data(), static_cast<size_t>(model.net.b1.size()));
        check_block(model.net.W2.data(), grads.W2.data(), static_cast<size_t>(model.net.W2.size()));
        check_block(model.net.b2.data(), grads.b2.data(), static_cast<size_t>(model.net.b2.size()));
    }
    for (size_t a = 0; a < adapters.size(); ++a) {
        check_block(adapters[a].B1.data(), grads.adapters[a].B1.data(),
                    static_cast<size_t>(adapters[a].B1.size()));
        check_block(adapters[a].A1.data(), grads.adapters[a].A1.data(),
                    static_cast<size_t>(adapters[a].A1.size()));
        check_block(adapters[a].B2.data(), grads.adapters[a].B2.data(),
                    static_cast<size_t>(adapters[a].B2.size()));
        check_block(adapters[a].A2.data(), grads.adapters[a].A2.data(),
                    static_cast<size_t>(adapters[a].A2.size()));
    }
    if (encoder.has_value()) {
        check_block(encoder->W.data(), grads.We.data(), static_cast<size_t>(encoder->W.size()));
        check_block(encoder->b.data(), grads.be.data(), static_cast<size_t>(encoder->b.size()));
    }
    return result;
}

namespace {

std::uint64_t fnv1a_bytes(std::uint64_t h, const void* data, size_t n) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (size_t i = 0; i < n; ++i) {
        h ^= p[i];
        h *= 1099511628211ULL;
    }
    return h;
}

std::uint64_t fnv1a_matrix(std::uint64_t h, const MatrixXd& m) {
    return fnv1a_bytes(h, m.data(), sizeof(double) * static_cast<size_t>(m.size()));
}

std::uint64_t fnv1a_vector(std::uint64_t h, const VectorXd& v) {
    return fnv1a_bytes(h, v.data(), sizeof(double) * static_cast<size_t>(v.size()));
}

constexpr std::uint64_t kFnvInit = 1469598103934665603ULL;

}  // namespace

std::uint64_t checksum(const Denoiser& net) {
    std::uint64_t h = kFnvInit;
    h = fnv1a_matrix(h, net.W1);
    h = fnv1a_vector(h, net.b1);
    h = fnv1a_matrix(h, net.W2);
    h = fnv1a_vector(h, net.b2);
    return h;
}

std::uint64_t checksum(const Adapter& adapter) {
    std::uint64_t h = kFnvInit;
    h = fnv1a_matrix(h, adapter.B1);
    h = fnv1a_matrix(h, adapter.A1);
    h = fnv1a_matrix(h, adapter.B2);
    h = fnv1a_matrix(h, adapter.A2);
    return h;
}

std::uint64_t checksum(const TrajectoryEncoder& encoder) {
    std::uint64_t h = kFnvInit;
    h = fnv1a_matrix(h, encoder.W);
    h = fnv1a_vector(h, encoder.b);
    return h;
}

// --- checkpoint container -------------------------------------------------
//
//   magic "CFCKPT01" | u32 kind | u64 meta_len | meta json bytes |
//   u64 n_tensors | per tensor: u32 name_len, name, u64 rows, u64 cols,
//   rows*cols f64 little-endian, column-major.

namespace {

constexpr char kMagic[8] = {'C', 'F', 'C', 'K', 'P', 'T', '0', '1'};

enum class CkptKind : std::uint32_t { base = 1, adapter = 2, encoder = 3 };

void write_u32(std::ofstream& out, std::uint32_t v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof(v));
}
void write_u64(std::ofstream& out, std::uint64_t v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof(v));
}

std::uint32_t read_u32(std::ifstream& in) {
    std::uint32_t v = 0;
    in.read(reinterpret_cast<char*>(&v), sizeof(v));
    return v;
}
std::uint64_t read_u64(std::ifstream& in) {
    std::uint64_t v = 0;
    in.read(reinterpret_cast<char*>(&v), sizeof(v));
    return v;
}

void write_tensor(std::ofstream& out, const std::string& name, const MatrixXd& m) {
    write_u32(out, static_cast<std::uint32_t>(name.size()));
    out.write(name.data(), static_cast<std::streamsize>(name.size()));
    write_u64(out, static_cast<std::uint64_t>(m.rows()));
    write_u64(out, static_cast<std::uint64_t>(m.cols()));
    out.write(reinterpret_cast<const char*>(m.data()),
              static_cast<std::streamsize>(sizeof(double) * static_cast<size_t>(m.size())));
}

struct CkptFile {
    CkptKind kind;
    nlohmann::json meta;
    std::vector<std::pair<std::string, MatrixXd>> tensors;

    const MatrixXd& tensor(const std::string& name) const {
        for (const auto& [n, m] : tensors)
            if (n == name) return m;
        throw CheckpointError("checkpoint tensor missing: " + name);
    }
};

void write_ckpt(const std::filesystem::path& path, CkptKind kind, const nlohmann::json& meta,
                const std::vector<std::pair<std::string, MatrixXd>>& tensors) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw CheckpointError("cannot open checkpoint for writing: " + path.string());
    out.write(kMagic, sizeof(kMagic));
    write_u32(out, static_cast<std::uint32_t>(kind));
    const std::string meta_str = meta.dump();
    write_u64(out, meta_str.size());
    out.write(meta_str.data(), static_cast<std::streamsize>(meta_str.size()));
    write_u64(out, tensors.size());
    for (const auto& [name, m] : tensors) write_tensor(out, name, m);
    if (!out) throw CheckpointError("checkpoint write failure: " + path.string());
}

CkptFile read_ckpt(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw CheckpointError("cannot open checkpoint: " + path.string());
    char magic[8];
    in.read(magic, sizeof(magic));
    if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
        throw CheckpointError("bad checkpoint magic: " + path.string());

    CkptFile file;
    file.kind = static_cast<CkptKind>(read_u32(in));
    const std::uint64_t meta_len = read_u64(in);
    std::string meta_str(meta_len, '\0');
    in.read(meta_str.data(), static_cast<std::streamsize>(meta_len));
    try {
        file.meta = nlohmann::json::parse(meta_str);
    } catch (const nlohmann::json::exception& e) {
        throw CheckpointError(std::string("checkpoint meta parse failure: ") + e.what());
    }

    const std::uint64_t n = read_u64(in);
    for (std::uint64_t i = 0; i < n; ++i) {
        const std::uint32_t name_len = read_u32(in);
        std::string name(name_len, '\0');
        in.read(name.data(), name_len);
        const std::uint64_t rows = read_u64(in);
        const std::uint64_t cols = read_u64(in);
        MatrixXd m(rows, cols);
        in.read(reinterpret_cast<char*>(m.data()),
                static_cast<std::streamsize>(sizeof(double) * rows * cols));
        if (!in) throw CheckpointError("truncated checkpoint: " + path.string());
        file.tensors.emplace_back(std::move(name), std::move(m));
    }
    return file;
}

}  // namespace

void save_base_checkpoint(const std::filesystem::path& path, const DiffusionModel& model,
                          const TrajectoryEncoder* encoder, Paradigm paradigm) {
    nlohmann::json meta{{"video", {{"K", model.dims.K},
                                   {"H", model.dims.H},
                                   {"W", model.dims.W},
                                   {"C", model.dims.C}}},
                        {"temb_dim", model.net.temb_dim},
                        {"hidden", model.net.hidden},
                        {"linear", model.net.linear_activation},
                        {"fps", model.fps},
                        {"layout",
                         {{"n_motion", model.layout.n_motion},
                          {"n_content", model.layout.n_content},
                          {"motion_vocab", model.layout.motion_vocab}}},
                        {"schedule", {{"T", model.sched.T}}},
                        {"paradigm", to_string(paradigm)}};
    std::vector<std::pair<std::string, MatrixXd>> tensors{
        {"W1", model.net.W1},
        {"b1", model.net.b1},
        {"W2", model.net.W2},
        {"b2", model.net.b2},
        {"betas", model.sched.betas}};
    if (encoder != nullptr) {
        tensors.emplace_back("enc_W", encoder->W);
        tensors.emplace_back("enc_b", encoder->b);
    }
    write_ckpt(path, CkptKind::base, meta, tensors);
}

BaseCheckpoint load_base_checkpoint(const std::filesystem::path& path) {
    const CkptFile file = read_ckpt(path);
    if (file.kind != CkptKind::base)
        throw CheckpointError("not a base checkpoint: " + path.string());

    BaseCheckpoint ckpt;
    const auto& meta = file.meta;
    ckpt.model.dims = {meta.at("video").at("K"), meta.at("video").at("H"),
                       meta.at("video").at("W"), meta.at("video").at("C")};
    ckpt.model.fps = meta.at("fps");
    ckpt.model.layout.n_motion = meta.at("layout").at("n_motion");
    ckpt.model.layout.n_content = meta.at("layout").at("n_content");
    ckpt.model.layout.motion_vocab =
        meta.at("layout").at("motion_vocab").get<std::vector<std::string>>();
    ckpt.paradigm = paradigm_from_string(meta.at("paradigm"));

    Denoiser& net = ckpt.model.net;
    net.video_dim = ckpt.model.dims.flat();
    net.temb_dim = meta.at("temb_dim");
    net.cond_dim = ckpt.model.layout.cond_dim();
    net.hidden = meta.at("hidden");
    net.linear_activation = meta.at("linear");
    net.W1 = file.tensor("W1");
    net.b1 = file.tensor("b1");
    net.W2 = file.tensor("W2");
    net.b2 = file.tensor("b2");

    const MatrixXd betas = file.tensor("betas");
    NoiseSchedule sched;
    sched.T = static_cast<int>(betas.rows());
    sched.betas = betas.col(0);
    sched.alphas.resize(sched.T);
    sched.alpha_bars.resize(sched.T);
    double prod = 1.0;
    for (int t = 0; t < sched.T; ++t) {
        sched.alphas[t] = 1.0 - sched.betas[t];
        prod *= sched.alphas[t];
        sched.alpha_bars[t] = prod;
    }
    sched.validate();
    ckpt.model.sched = std::move(sched);

    for (const auto& [name, m] : file.tensors) {
        if (name == "enc_W") {
            TrajectoryEncoder enc;
            enc.W = m;
            enc.b = file.tensor("enc_b");
            ckpt.encoder = std::move(enc);
        }
    }
    return ckpt;
}

void save_adapter_checkpoint(const std::filesystem::path& path, const Adapter& adapter) {
    nlohmann::json meta{
        {"role", adapter.role == AdapterRole::appearance ? "appearance" : "camera"},
        {"rank", adapter.rank},
        {"alpha", adapter.alpha}};
    write_ckpt(path, CkptKind::adapter, meta,
               {{"B1", adapter.B1}, {"A1", adapter.A1}, {"B2", adapter.B2}, {"A2", adapter.A2}});
}

Adapter load_adapter_checkpoint(const std::filesystem::path& path) {
    const CkptFile file = read_ckpt(path);
    if (file.kind != CkptKind::adapter)
        throw CheckpointError("not an adapter checkpoint: " + path.string());
    Adapter a;
    a.role = file.meta.at("role") == "appearance" ? AdapterRole::appearance : AdapterRole::camera;
    a.rank = file.meta.at("rank");
    a.alpha = file.meta.at("alpha");
    a.B1 = file.tensor("B1");
    a.A1 = file.tensor("A1");
    a.B2 = file.tensor("B2");
    a.A2 = file.tensor("A2");
    return a;
}

void save_encoder_checkpoint(const std::filesystem::path& path,
                             const TrajectoryEncoder& encoder) {
    write_ckpt(path, CkptKind::encoder,
               {{"enc_dim", encoder.enc_dim()}, {"feat_dim", encoder.feat_dim()}},
               {{"W", encoder.W}, {"b", encoder.b}});
}

TrajectoryEncoder load_encoder_checkpoint(const std::filesystem::path& path) {
    const CkptFile file = read_ckpt(path);
    if (file.kind != CkptKind::encoder)
        throw CheckpointError("not an encoder checkpoint: " + path.string());
    TrajectoryEncoder e;
    e.W = file.tensor("W");
    e.b = file.tensor("b");
    return e;
}

}  // namespace camforge::train
