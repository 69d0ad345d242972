#pragma once

#include <cstdint>
#include <string>

#include <json.hpp>

namespace ssrgan {

/// Full run configuration; serialized alongside every checkpoint and
/// mirrored one-to-one by the JSON config file.
struct TrainConfig {
    std::string dataset_root;
    std::string dataset_name = "dataset";
    std::uint64_t image_size = 128;
    double level = 0.3; // corruption fraction p
    std::uint64_t epochs = 100;
    std::uint64_t batch_size = 64;
    double lr0 = 0.0002;
    std::uint64_t lr_half_every = 25;
    double beta1 = 0.9;
    double beta2 = 0.999;
    std::uint64_t seed = 0;
    bool use_batch_norm = true;
    std::uint64_t shuffle_stages = 2;
    std::uint64_t gen_width = 64;
    std::uint64_t gen_res_blocks = 6;
    std::uint64_t disc_base_width = 64; // channel ladder w, 2w, 4w, 8w
    double fill_value = -1.0; // corrupted-pixel value in [-1,1] space
    double train_fraction = 0.8;
    std::uint64_t checkpoint_every = 25;
    std::string checkpoint_dir = "runs/default";
    std::string metrics_path; // empty: <checkpoint_dir>/metrics.csv
    std::uint64_t nmse_subset = 64;
    bool nmse_denormalized = true;

    void validate() const; // throws ConfigError

    std::string resolved_metrics_path() const {
        return metrics_path.empty() ? checkpoint_dir + "/metrics.csv" : metrics_path;
    }
};

nlohmann::json to_json(const TrainConfig& config);
TrainConfig config_from_json(const nlohmann::json& j);

/// lr0 * 0.5^floor(epoch / lr_half_every).
double lr_at_epoch(const TrainConfig& config, std::uint64_t epoch);

} // namespace ssrgan
