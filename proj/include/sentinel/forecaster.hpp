#pragma once

#include "sentinel/types.hpp"

#include <cstdint>
#include <span>

namespace sentinel {

struct ForecasterConfig {
    DetectorKind kind = DetectorKind::RecurrentForecaster;
    Index time_steps = 74;
    int conv_kernel = 32;
    int conv_filters = 5;
    int lstm_units = 32;
    int max_epochs = 100;
    int batch_size = 10;
    Scalar learning_rate = 1e-3;
    Scalar beta1 = 0.9;
    Scalar beta2 = 0.999;
    Scalar epsilon = 1e-8;
    Scalar min_delta = 1e-2;
    int patience = 3;
    std::uint64_t seed = 0;
};

/// Per-sample training losses and the dynamic decision threshold:
/// threshold = mean + 8 * population SD of the losses.
struct LossThreshold {
    std::vector<Scalar> losses;
    Scalar mae = 0.0;
    Scalar sigma = 0.0;
    Scalar threshold = 0.0;
};

LossThreshold compute_threshold(std::span<const Scalar> losses);

struct TrainingError : std::runtime_error {
    int epoch;
    TrainingError(const std::string& what, int e) : std::runtime_error(what), epoch(e) {}
};

/// One-step-ahead forecaster over [T, D] windows. Two architectures:
///  - conv1d: one convolution layer (linear activation) -> flatten -> dense
///    to D outputs, per-sample loss = MSE over the D streams;
///  - recurrent: one LSTM layer -> dense to D outputs, per-sample loss = MAE.
/// All parameters live in one flat vector so the optimizer and the
/// finite-difference checks can treat the model uniformly.
class ForecasterModel {
public:
    static ForecasterModel create(const ForecasterConfig& config, Index streams);

    const ForecasterConfig& config() const { return config_; }
    Index streams() const { return streams_; }

    Vector& params() { return theta_; }
    const Vector& params() const { return theta_; }
    Index param_count() const { return theta_.size(); }

    Vector predict(const Eigen::Ref<const Matrix>& window) const;

    /// Loss for one (window, next-row) pair, averaged over the D streams.
    Scalar sample_loss(const Eigen::Ref<const Matrix>& window,
                       const Eigen::Ref<const Vector>& target) const;

    /// Accumulates d(loss)/d(params) into grad (same size as params);
    /// returns the sample loss.
    Scalar backward(const Eigen::Ref<const Matrix>& window,
                    const Eigen::Ref<const Vector>& target, Vector& grad) const;

    ForecasterModel(ForecasterConfig config, Index streams, Vector theta);

private:
    ForecasterConfig config_;
    Index streams_ = 0;
    Vector theta_;
};

struct TrainResult {
    int epochs_run = 0;
    Scalar final_epoch_loss = 0.0;
    LossThreshold threshold;
};

/// Mini-batch Adam with early stopping on the epoch training loss
/// (min_delta / patience semantics); after training, per-sample losses on the
/// training windows define the LossThreshold.
TrainResult train_forecaster(ForecasterModel& model, const WindowTensor& windows);

std::vector<Scalar> per_sample_losses(const ForecasterModel& model, const WindowTensor& windows);

/// Per-window verdicts: a window is anomalous iff its loss strictly exceeds
/// the threshold. The verdict timestamp is the predicted row's grid time.
std::vector<AnomalyVerdict> forecaster_detect(const ForecasterModel& model,
                                              const LossThreshold& threshold,
                                              const WindowTensor& windows,
                                              const std::vector<std::string>& streams,
                                              const std::string& config_id);

}  // namespace sentinel
