#include "sentinel/forecaster.hpp"

#include "sentinel/util.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

namespace sentinel {

LossThreshold compute_threshold(std::span<const Scalar> losses) {
    if (losses.empty()) throw ValidationError("compute_threshold: empty loss sequence");
    LossThreshold t;
    t.losses.assign(losses.begin(), losses.end());
    Scalar sum = 0.0;
    for (Scalar l : losses) {
        if (!std::isfinite(l)) throw ValidationError("compute_threshold: non-finite loss");
        sum += l;
    }
    const Scalar n = static_cast<Scalar>(losses.size());
    t.mae = sum / n;
    Scalar ss = 0.0;
    for (Scalar l : losses) {
        Scalar d = l - t.mae;
        ss += d * d;
    }
    t.sigma = std::sqrt(ss / n);
    t.threshold = t.mae + 8.0 * t.sigma;
    return t;
}

namespace {

inline Scalar sigmoid(Scalar x) { return 1.0 / (1.0 + std::exp(-x)); }

// Parameter layout per architecture. All offsets into the flat theta vector.
struct ConvLayout {
    Index F, K, D, L;  // filters, kernel length, streams, conv output length
    Index conv_w, conv_b, dense_w, dense_b, total;

    ConvLayout(const ForecasterConfig& cfg, Index streams) {
        F = cfg.conv_filters;
        K = cfg.conv_kernel;
        D = streams;
        L = cfg.time_steps - K + 1;
        if (L < 1) throw ValidationError("conv kernel longer than window");
        conv_w = 0;
        conv_b = conv_w + F * K * D;
        dense_w = conv_b + F;
        dense_b = dense_w + L * F * D;
        total = dense_b + D;
    }
};

struct LstmLayout {
    Index H, D;
    Index wx, wh, b, dense_w, dense_b, total;

    LstmLayout(const ForecasterConfig& cfg, Index streams) {
        H = cfg.lstm_units;
        D = streams;
        wx = 0;
        wh = wx + 4 * H * D;
        b = wh + 4 * H * H;
        dense_w = b + 4 * H;
        dense_b = dense_w + H * D;
        total = dense_b + D;
    }
};

using ConstMap = Eigen::Map<const Matrix>;
using MutMap = Eigen::Map<Matrix>;

Vector conv_forward(const ConvLayout& ly, const Vector& theta,
                    const Eigen::Ref<const Matrix>& window, Matrix* z_out) {
    // z(t, f) = b_f + sum_{k,d} W[f](k,d) X(t+k, d); linear activation.
    Matrix z(ly.L, ly.F);
    for (Index f = 0; f < ly.F; ++f) {
        ConstMap w(theta.data() + ly.conv_w + f * ly.K * ly.D, ly.D, ly.K);  // column k holds W[f](k, :)
        const Scalar bias = theta(ly.conv_b + f);
        for (Index t = 0; t < ly.L; ++t) {
            Scalar acc = bias;
            for (Index k = 0; k < ly.K; ++k) {
                acc += window.row(t + k).dot(w.col(k));
            }
            z(t, f) = acc;
        }
    }
    // Dense head over the flattened (L, F) map; flatten index m = t*F + f.
    ConstMap dw(theta.data() + ly.dense_w, ly.D, ly.L * ly.F);  // column m = weights for unit m
    Vector y = theta.segment(ly.dense_b, ly.D);
    for (Index t = 0; t < ly.L; ++t) {
        for (Index f = 0; f < ly.F; ++f) {
            y += z(t, f) * dw.col(t * ly.F + f);
        }
    }
    if (z_out) *z_out = std::move(z);
    return y;
}

struct LstmTrace {
    Matrix i, f, g, o, c, tanh_c, h;  // H x T
};

Vector lstm_forward(const LstmLayout& ly, const Vector& theta,
                    const Eigen::Ref<const Matrix>& window, LstmTrace* trace) {
    const Index T = window.rows();
    ConstMap wx(theta.data() + ly.wx, 4 * ly.H, ly.D);
    ConstMap wh(theta.data() + ly.wh, 4 * ly.H, ly.H);
    const auto bias = theta.segment(ly.b, 4 * ly.H);

    if (trace) {
        trace->i.resize(ly.H, T);
        trace->f.resize(ly.H, T);
        trace->g.resize(ly.H, T);
        trace->o.resize(ly.H, T);
        trace->c.resize(ly.H, T);
        trace->tanh_c.resize(ly.H, T);
        trace->h.resize(ly.H, T);
    }

    Vector h = Vector::Zero(ly.H);
    Vector c = Vector::Zero(ly.H);
    Vector a(4 * ly.H);
    for (Index t = 0; t < T; ++t) {
        a.noalias() = wx * window.row(t).transpose();
        a.noalias() += wh * h;
        a += bias;
        Vector gi = a.segment(0, ly.H).unaryExpr([](Scalar x) { return sigmoid(x); });
        Vector gf = a.segment(ly.H, ly.H).unaryExpr([](Scalar x) { return sigmoid(x); });
        Vector gg = a.segment(2 * ly.H, ly.H).array().tanh();
        Vector go = a.segment(3 * ly.H, ly.H).unaryExpr([](Scalar x) { return sigmoid(x); });
        c = gf.cwiseProduct(c) + gi.cwiseProduct(gg);
        Vector tc = c.array().tanh();
        h = go.cwiseProduct(tc);
        if (trace) {
            trace->i.col(t) = gi;
            trace->f.col(t) = gf;
            trace->g.col(t) = gg;
            trace->o.col(t) = go;
            trace->c.col(t) = c;
            trace->tanh_c.col(t) = tc;
            trace->h.col(t) = h;
        }
    }

    ConstMap dw(theta.data() + ly.dense_w, ly.D, ly.H);  // column h = weights for unit h
    return dw * h + theta.segment(ly.dense_b, ly.D);
}

}  // namespace

ForecasterModel::ForecasterModel(ForecasterConfig config, Index streams, Vector theta)
    : config_(std::move(config)), streams_(streams), theta_(std::move(theta)) {}

ForecasterModel ForecasterModel::create(const ForecasterConfig& config, Index streams) {
    if (streams < 1) throw ValidationError("forecaster needs at least one stream");
    std::mt19937_64 rng(derive_seed(config.seed, "forecaster-init"));
    auto glorot = [&](MutMap block, Index fan_in, Index fan_out) {
        const Scalar limit = std::sqrt(6.0 / static_cast<Scalar>(fan_in + fan_out));
        std::uniform_real_distribution<Scalar> dist(-limit, limit);
        for (Index i = 0; i < block.size(); ++i) block.data()[i] = dist(rng);
    };

    Vector theta;
    if (config.kind == DetectorKind::ConvForecaster) {
        ConvLayout ly(config, streams);
        theta = Vector::Zero(ly.total);
        glorot(MutMap(theta.data() + ly.conv_w, ly.D, ly.F * ly.K), ly.K * ly.D, ly.K * ly.F);
        glorot(MutMap(theta.data() + ly.dense_w, ly.D, ly.L * ly.F), ly.L * ly.F, ly.D);
    } else if (config.kind == DetectorKind::RecurrentForecaster) {
        LstmLayout ly(config, streams);
        theta = Vector::Zero(ly.total);
        glorot(MutMap(theta.data() + ly.wx, 4 * ly.H, ly.D), ly.D, 4 * ly.H);
        glorot(MutMap(theta.data() + ly.wh, 4 * ly.H, ly.H), ly.H, 4 * ly.H);
        glorot(MutMap(theta.data() + ly.dense_w, ly.D, ly.H), ly.H, ly.D);
    } else {
        throw ValidationError("forecaster kind must be conv or recurrent");
    }
    return ForecasterModel(config, streams, std::move(theta));
}

Vector ForecasterModel::predict(const Eigen::Ref<const Matrix>& window) const {
    if (window.rows() != config_.time_steps || window.cols() != streams_) {
        throw ValidationError("window shape does not match trained forecaster");
    }
    if (config_.kind == DetectorKind::ConvForecaster) {
        return conv_forward(ConvLayout(config_, streams_), theta_, window, nullptr);
    }
    return lstm_forward(LstmLayout(config_, streams_), theta_, window, nullptr);
}

Scalar ForecasterModel::sample_loss(const Eigen::Ref<const Matrix>& window,
                                    const Eigen::Ref<const Vector>& target) const {
    const Vector y = predict(window);
    const Vector err = y - target;
    const Scalar d = static_cast<Scalar>(streams_);
    if (config_.kind == DetectorKind::ConvForecaster) {
        return err.squaredNorm() / d;
    }
    return err.cwiseAbs().sum() / d;
}

Scalar ForecasterModel::backward(const Eigen::Ref<const Matrix>& window,
                                 const Eigen::Ref<const Vector>& target, Vector& grad) const {
    if (grad.size() != theta_.size()) grad = Vector::Zero(theta_.size());
    const Scalar d = static_cast<Scalar>(streams_);

    if (config_.kind == DetectorKind::ConvForecaster) {
        ConvLayout ly(config_, streams_);
        Matrix z;
        const Vector y = conv_forward(ly, theta_, window, &z);
        const Vector err = y - target;
        const Scalar loss = err.squaredNorm() / d;
        const Vector dy = 2.0 * err / d;

        ConstMap dw(theta_.data() + ly.dense_w, ly.D, ly.L * ly.F);
        MutMap g_dw(grad.data() + ly.dense_w, ly.D, ly.L * ly.F);
        grad.segment(ly.dense_b, ly.D) += dy;
        for (Index t = 0; t < ly.L; ++t) {
            for (Index f = 0; f < ly.F; ++f) {
                const Index m = t * ly.F + f;
                g_dw.col(m) += z(t, f) * dy;
            }
        }
        for (Index f = 0; f < ly.F; ++f) {
            MutMap g_w(grad.data() + ly.conv_w + f * ly.K * ly.D, ly.D, ly.K);
            Scalar g_b = 0.0;
            for (Index t = 0; t < ly.L; ++t) {
                const Scalar dz = dw.col(t * ly.F + f).dot(dy);
                g_b += dz;
                for (Index k = 0; k < ly.K; ++k) {
                    g_w.col(k) += dz * window.row(t + k).transpose();
                }
            }
            grad(ly.conv_b + f) += g_b;
        }
        return loss;
    }

    LstmLayout ly(config_, streams_);
    LstmTrace tr;
    const Vector y = lstm_forward(ly, theta_, window, &tr);
    const Vector err = y - target;
    const Scalar loss = err.cwiseAbs().sum() / d;
    const Vector dy = err.unaryExpr([](Scalar e) { return e > 0 ? 1.0 : (e < 0 ? -1.0 : 0.0); }) / d;

    const Index T = window.rows();
    ConstMap wh(theta_.data() + ly.wh, 4 * ly.H, ly.H);
    ConstMap dw(theta_.data() + ly.dense_w, ly.D, ly.H);
    MutMap g_wx(grad.data() + ly.wx, 4 * ly.H, ly.D);
    MutMap g_wh(grad.data() + ly.wh, 4 * ly.H, ly.H);
    MutMap g_dw(grad.data() + ly.dense_w, ly.D, ly.H);

    g_dw += dy * tr.h.col(T - 1).transpose();
    grad.segment(ly.dense_b, ly.D) += dy;

    Vector dh = dw.transpose() * dy;
    Vector dc = Vector::Zero(ly.H);
    Vector da(4 * ly.H);
    for (Index t = T - 1; t >= 0; --t) {
        const auto gi = tr.i.col(t);
        const auto gf = tr.f.col(t);
        const auto gg = tr.g.col(t);
        const auto go = tr.o.col(t);
        const auto tc = tr.tanh_c.col(t);
        const Vector c_prev = t > 0 ? Vector(tr.c.col(t - 1)) : Vector(Vector::Zero(ly.H));
        const Vector h_prev = t > 0 ? Vector(tr.h.col(t - 1)) : Vector(Vector::Zero(ly.H));

        dc.array() += dh.array() * go.array() * (1.0 - tc.array().square());
        da.segment(0, ly.H) = dc.cwiseProduct(gg).array() * gi.array() * (1.0 - gi.array());
        da.segment(ly.H, ly.H) = dc.cwiseProduct(c_prev).array() * gf.array() * (1.0 - gf.array());
        da.segment(2 * ly.H, ly.H) = dc.cwiseProduct(gi).array() * (1.0 - gg.array().square());
        da.segment(3 * ly.H, ly.H) = dh.cwiseProduct(tc).array() * go.array() * (1.0 - go.array());

        g_wx.noalias() += da * window.row(t);
        g_wh.noalias() += da * h_prev.transpose();
        grad.segment(ly.b, 4 * ly.H) += da;

        dh.noalias() = wh.transpose() * da;
        dc = dc.cwiseProduct(gf);
    }
    return loss;
}

TrainResult train_forecaster(ForecasterModel& model, const WindowTensor& windows) {
    const ForecasterConfig& cfg = model.config();
    if (windows.time_steps != cfg.time_steps || windows.streams != model.streams()) {
        throw ValidationError("window tensor shape does not match forecaster config");
    }
    if (windows.samples < 1) {
        throw ValidationError("no training samples");
    }

    const Index n = windows.samples;
    const Index p = model.param_count();
    Vector m = Vector::Zero(p);
    Vector v = Vector::Zero(p);
    Vector grad(p);
    long step = 0;

    std::vector<Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Index{0});

    Scalar best = std::numeric_limits<Scalar>::infinity();
    int wait = 0;
    int epochs_run = 0;
    Scalar epoch_loss = 0.0;

    for (int epoch = 0; epoch < cfg.max_epochs; ++epoch) {
        std::mt19937_64 rng(derive_seed(cfg.seed, "forecaster-epoch", static_cast<std::uint64_t>(epoch)));
        std::shuffle(order.begin(), order.end(), rng);

        Scalar loss_sum = 0.0;
        for (Index start = 0; start < n; start += cfg.batch_size) {
            const Index count = std::min<Index>(cfg.batch_size, n - start);
            grad.setZero();
            for (Index b = 0; b < count; ++b) {
                const Index i = order[static_cast<std::size_t>(start + b)];
                loss_sum += model.backward(windows.window(i), windows.target_row(i).transpose(), grad);
            }
            grad /= static_cast<Scalar>(count);

            ++step;
            m = cfg.beta1 * m + (1.0 - cfg.beta1) * grad;
            v = cfg.beta2 * v + (1.0 - cfg.beta2) * grad.cwiseProduct(grad);
            const Scalar bc1 = 1.0 - std::pow(cfg.beta1, static_cast<Scalar>(step));
            const Scalar bc2 = 1.0 - std::pow(cfg.beta2, static_cast<Scalar>(step));
            model.params().array() -=
                cfg.learning_rate * (m.array() / bc1) /
                ((v.array() / bc2).sqrt() + cfg.epsilon);
        }
        epoch_loss = loss_sum / static_cast<Scalar>(n);
        if (!std::isfinite(epoch_loss)) {
            throw TrainingError("training diverged (non-finite loss) at epoch " +
                                    std::to_string(epoch),
                                epoch);
        }
        epochs_run = epoch + 1;

        if (best - epoch_loss > cfg.min_delta) {
            best = epoch_loss;
            wait = 0;
        } else {
            ++wait;
            if (wait >= cfg.patience) break;
        }
    }

    TrainResult result;
    result.epochs_run = epochs_run;
    result.final_epoch_loss = epoch_loss;
    result.threshold = compute_threshold(per_sample_losses(model, windows));
    return result;
}

std::vector<Scalar> per_sample_losses(const ForecasterModel& model, const WindowTensor& windows) {
    std::vector<Scalar> losses;
    losses.reserve(static_cast<std::size_t>(windows.samples));
    for (Index i = 0; i < windows.samples; ++i) {
        losses.push_back(model.sample_loss(windows.window(i), windows.target_row(i).transpose()));
    }
    return losses;
}

std::vector<AnomalyVerdict> forecaster_detect(const ForecasterModel& model,
                                              const LossThreshold& threshold,
                                              const WindowTensor& windows,
                                              const std::vector<std::string>& streams,
                                              const std::string& config_id) {
    if (windows.time_steps != model.config().time_steps || windows.streams != model.streams()) {
        throw ValidationError("window tensor shape does not match trained forecaster");
    }
    std::vector<AnomalyVerdict> verdicts;
    verdicts.reserve(static_cast<std::size_t>(windows.samples));
    for (Index i = 0; i < windows.samples; ++i) {
        AnomalyVerdict v;
        v.timestamp = windows.target_timestamps[static_cast<std::size_t>(i)];
        v.streams = streams;
        v.score = model.sample_loss(windows.window(i), windows.target_row(i).transpose());
        v.threshold = threshold.threshold;
        v.is_anomaly = v.score > threshold.threshold;
        v.taxonomy = windows.streams >= 2 ? Taxonomy::Combined : Taxonomy::Contextual;
        v.detector = model.config().kind;
        v.config_id = config_id;
        verdicts.push_back(std::move(v));
    }
    return verdicts;
}

}  // namespace sentinel
