#pragma once

#include <memory>
#include <optional>

#include "ssrgan/adam.hpp"
#include "ssrgan/checkpoint.hpp"
#include "ssrgan/corruption.hpp"
#include "ssrgan/data.hpp"
#include "ssrgan/losses.hpp"
#include "ssrgan/metrics.hpp"
#include "ssrgan/model.hpp"
#include "ssrgan/training_config.hpp"

namespace ssrgan {

GeneratorConfig generator_config_from(const TrainConfig& config);
DiscriminatorConfig discriminator_config_from(const TrainConfig& config);

struct EvaluationResult {
    NmseResult model;    // NMSE of the reconstruction
    NmseResult baseline; // NMSE of the corrupted input itself
};

/// Owns both networks, their optimizers and the run RNG stream. All
/// randomness (shuffles, masks, alpha draws) comes from the single seeded
/// stream in a fixed order, so a (config, seed) pair determines every
/// checkpoint byte; resuming from a checkpoint replays the identical run.
class Trainer {
public:
    explicit Trainer(TrainConfig config);
    static Trainer from_checkpoint(const std::filesystem::path& path);

    /// One alternating optimization step on a clean [-1,1] batch:
    /// corrupt with fresh masks, one discriminator update on
    /// (real, detached fake) with freshly smoothed targets, then one
    /// generator update through the refreshed discriminator.
    LossReport train_step(const Tensor<float>& clean_batch, double lr);

    /// Full protocol: epoch loop with seeded shuffle, per-epoch metrics CSV
    /// row (epoch, lr, mean losses, train-subset NMSE), periodic + final
    /// checkpoints. Returns the last checkpoint path. A nonzero
    /// `stop_after_epochs` pauses the run early (resume via checkpoint).
    std::filesystem::path train(std::uint64_t stop_after_epochs = 0);

    /// Eval-mode reconstruction NMSE over a manifest with per-image fixed
    /// masks seeded by (seed ^ image id); NMSE in de-normalized [0,1] space.
    EvaluationResult evaluate(const DatasetManifest& manifest, double level,
                              std::uint64_t seed, std::size_t limit = 0);

    Checkpoint make_checkpoint() const;

    const TrainConfig& config() const { return config_; }
    Generator<float>& generator() { return *generator_; }
    Discriminator<float>& discriminator() { return *discriminator_; }
    std::uint64_t completed_epochs() const { return completed_epochs_; }

private:
    void load_state(const Checkpoint& ckpt);

    TrainConfig config_;
    std::unique_ptr<Generator<float>> generator_;
    std::unique_ptr<Discriminator<float>> discriminator_;
    Adam<float> opt_g_;
    Adam<float> opt_d_;
    Rng run_rng_;
    std::uint64_t completed_epochs_ = 0;
};

/// Batch assembly: stacks (3,S,S) records into (N,3,S,S).
Tensor<float> stack_batch(const std::vector<const Tensor<float>*>& images);

} // namespace ssrgan
