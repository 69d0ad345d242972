#include "ssrgan/training.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <iostream>

#include "ssrgan/errors.hpp"
#include "ssrgan/image.hpp"

namespace ssrgan {

void TrainConfig::validate() const {
    if (image_size < 8 || image_size % 4 != 0 ||
        image_size % (std::uint64_t(1) << shuffle_stages) != 0)
        throw ConfigError("image_size must be >= 8 and divisible by 4 (and by the total "
                          "pixel-shuffle upscaling)");
    if (!(level >= 0.0 && level <= 1.0)) throw ConfigError("level must be in [0,1]");
    if (epochs == 0) throw ConfigError("epochs must be positive");
    if (batch_size == 0) throw ConfigError("batch_size must be positive");
    if (!(lr0 > 0.0)) throw ConfigError("lr0 must be positive");
    if (lr_half_every == 0) throw ConfigError("lr_half_every must be positive");
    if (!(beta1 >= 0.0 && beta1 < 1.0 && beta2 >= 0.0 && beta2 < 1.0))
        throw ConfigError("adam betas must be in [0,1)");
    if (!(train_fraction > 0.0 && train_fraction <= 1.0))
        throw ConfigError("train_fraction must be in (0,1]");
    if (gen_width == 0 || gen_res_blocks == 0)
        throw ConfigError("generator width and residual blocks must be positive");
    if (disc_base_width == 0) throw ConfigError("disc_base_width must be positive");
    if (checkpoint_every == 0) throw ConfigError("checkpoint_every must be positive");
}

nlohmann::json to_json(const TrainConfig& c) {
    return {{"dataset_root", c.dataset_root},
            {"dataset_name", c.dataset_name},
            {"image_size", c.image_size},
            {"level", c.level},
            {"epochs", c.epochs},
            {"batch_size", c.batch_size},
            {"lr0", c.lr0},
            {"lr_half_every", c.lr_half_every},
            {"beta1", c.beta1},
            {"beta2", c.beta2},
            {"seed", c.seed},
            {"use_batch_norm", c.use_batch_norm},
            {"shuffle_stages", c.shuffle_stages},
            {"gen_width", c.gen_width},
            {"gen_res_blocks", c.gen_res_blocks},
            {"disc_base_width", c.disc_base_width},
            {"fill_value", c.fill_value},
            {"train_fraction", c.train_fraction},
            {"checkpoint_every", c.checkpoint_every},
            {"checkpoint_dir", c.checkpoint_dir},
            {"metrics_path", c.metrics_path},
            {"nmse_subset", c.nmse_subset},
            {"nmse_denormalized", c.nmse_denormalized}};
}

TrainConfig config_from_json(const nlohmann::json& j) {
    TrainConfig c;
    try {
        c.dataset_root = j.value("dataset_root", c.dataset_root);
        c.dataset_name = j.value("dataset_name", c.dataset_name);
        c.image_size = j.value("image_size", c.image_size);
        c.level = j.value("level", c.level);
        c.epochs = j.value("epochs", c.epochs);
        c.batch_size = j.value("batch_size", c.batch_size);
        c.lr0 = j.value("lr0", c.lr0);
        c.lr_half_every = j.value("lr_half_every", c.lr_half_every);
        c.beta1 = j.value("beta1", c.beta1);
        c.beta2 = j.value("beta2", c.beta2);
        c.seed = j.value("seed", c.seed);
        c.use_batch_norm = j.value("use_batch_norm", c.use_batch_norm);
        c.shuffle_stages = j.value("shuffle_stages", c.shuffle_stages);
        c.gen_width = j.value("gen_width", c.gen_width);
        c.gen_res_blocks = j.value("gen_res_blocks", c.gen_res_blocks);
        c.disc_base_width = j.value("disc_base_width", c.disc_base_width);
        c.fill_value = j.value("fill_value", c.fill_value);
        c.train_fraction = j.value("train_fraction", c.train_fraction);
        c.checkpoint_every = j.value("checkpoint_every", c.checkpoint_every);
        c.checkpoint_dir = j.value("checkpoint_dir", c.checkpoint_dir);
        c.metrics_path = j.value("metrics_path", c.metrics_path);
        c.nmse_subset = j.value("nmse_subset", c.nmse_subset);
        c.nmse_denormalized = j.value("nmse_denormalized", c.nmse_denormalized);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("bad config JSON: ") + e.what());
    }
    return c;
}

double lr_at_epoch(const TrainConfig& config, std::uint64_t epoch) {
    // exact scaling by 2^-k: every halving is representable
    return std::ldexp(config.lr0, -int(epoch / config.lr_half_every));
}

GeneratorConfig generator_config_from(const TrainConfig& c) {
    GeneratorConfig g;
    g.channels = 3;
    g.width = c.gen_width;
    g.res_blocks = c.gen_res_blocks;
    g.shuffle_stages = c.shuffle_stages;
    g.use_bn = c.use_batch_norm;
    return g;
}

DiscriminatorConfig discriminator_config_from(const TrainConfig& c) {
    DiscriminatorConfig d;
    const std::size_t w = c.disc_base_width;
    d.block_channels = {w, 2 * w, 4 * w, 8 * w};
    d.use_bn = c.use_batch_norm;
    return d;
}

namespace {

std::string format_double(double v) {
    char buffer[32];
    auto [end, ec] = std::to_chars(buffer, buffer + sizeof(buffer), v);
    return std::string(buffer, end);
}

void check_finite_report(const LossReport& report) {
    if (!std::isfinite(report.loss_d) || !std::isfinite(report.loss_g))
        throw TrainingDivergenceError(
            "non-finite loss: loss_D=" + std::to_string(report.loss_d) +
            " (F=" + std::to_string(report.loss_f) + ", R=" + std::to_string(report.loss_r) +
            ") loss_G=" + std::to_string(report.loss_g) +
            " (content=" + std::to_string(report.loss_g_content) +
            ", adv=" + std::to_string(report.loss_g_adv) + ")");
}

} // namespace

Tensor<float> stack_batch(const std::vector<const Tensor<float>*>& images) {
    if (images.empty()) throw ShapeError("stack_batch: empty batch");
    const Shape& single = images.front()->shape();
    if (single.size() != 3) throw ShapeError("stack_batch: expected (C,H,W) images");
    Shape out_shape{images.size(), single[0], single[1], single[2]};
    Tensor<float> out(out_shape);
    const std::size_t stride = images.front()->size();
    for (std::size_t i = 0; i < images.size(); ++i) {
        if (images[i]->shape() != single) throw ShapeError("stack_batch: ragged shapes");
        std::copy(images[i]->values().begin(), images[i]->values().end(),
                  out.data() + i * stride);
    }
    return out;
}

Trainer::Trainer(TrainConfig config) : config_(std::move(config)), run_rng_(config_.seed) {
    config_.validate();
    Rng init_rng(derive_seed(config_.seed, 0x696e6974)); // parameter-init stream
    generator_ = std::make_unique<Generator<float>>(generator_config_from(config_), init_rng);
    discriminator_ =
        std::make_unique<Discriminator<float>>(discriminator_config_from(config_), init_rng);
    opt_g_ = Adam<float>(generator_->parameters(), float(config_.beta1), float(config_.beta2));
    opt_d_ = Adam<float>(discriminator_->parameters(), float(config_.beta1),
                         float(config_.beta2));
}

Trainer Trainer::from_checkpoint(const std::filesystem::path& path) {
    Checkpoint ckpt = load_checkpoint(path);
    Trainer trainer(ckpt.config);
    trainer.load_state(ckpt);
    return trainer;
}

void Trainer::load_state(const Checkpoint& ckpt) {
    auto restore = [&](const std::string& name, Tensor<float>& into) {
        const Tensor<float>* stored = ckpt.find(name);
        if (!stored) throw CheckpointError("checkpoint is missing tensor " + name);
        if (stored->shape() != into.shape())
            throw CheckpointError("checkpoint tensor " + name + " has shape " +
                                  shape_str(stored->shape()) + ", expected " +
                                  shape_str(into.shape()));
        into = *stored;
    };

    for (auto& [net, opt] :
         {std::pair<Network<float>*, Adam<float>*>{generator_.get(), &opt_g_},
          std::pair<Network<float>*, Adam<float>*>{discriminator_.get(), &opt_d_}}) {
        auto params = net->parameters();
        auto& states = opt->states();
        for (std::size_t i = 0; i < params.size(); ++i) {
            restore(params[i]->name, params[i]->value);
            restore("adam.m." + params[i]->name, states[i].m);
            restore("adam.v." + params[i]->name, states[i].v);
        }
        for (auto& [name, buffer] : net->buffers()) restore(name, *buffer);
    }
    opt_g_.set_step_count(ckpt.adam_step_g);
    opt_d_.set_step_count(ckpt.adam_step_d);
    run_rng_.set_state(ckpt.rng_state);
    completed_epochs_ = ckpt.epoch;
}

Checkpoint Trainer::make_checkpoint() const {
    Checkpoint ckpt;
    ckpt.config = config_;
    ckpt.epoch = completed_epochs_;
    ckpt.rng_state = run_rng_.state();
    ckpt.adam_step_g = opt_g_.step_count();
    ckpt.adam_step_d = opt_d_.step_count();

    for (auto& [net, opt] :
         {std::pair<Network<float>*, const Adam<float>*>{generator_.get(), &opt_g_},
          std::pair<Network<float>*, const Adam<float>*>{discriminator_.get(), &opt_d_}}) {
        auto params = net->parameters();
        const auto& states = opt->states();
        for (std::size_t i = 0; i < params.size(); ++i) {
            ckpt.tensors.emplace_back(params[i]->name, params[i]->value);
            ckpt.tensors.emplace_back("adam.m." + params[i]->name, states[i].m);
            ckpt.tensors.emplace_back("adam.v." + params[i]->name, states[i].v);
        }
        for (auto& [name, buffer] : net->buffers()) ckpt.tensors.emplace_back(name, *buffer);
    }
    return ckpt;
}

LossReport Trainer::train_step(const Tensor<float>& clean_batch, double lr) {
    if (clean_batch.rank() != 4) throw ShapeError("train_step: expected (N,3,H,W) batch");
    const std::size_t n = clean_batch.shape()[0];
    const std::size_t h = clean_batch.shape()[2], w = clean_batch.shape()[3];

    // fresh corruption masks per image
    Tensor<float> corrupted = clean_batch;
    for (std::size_t i = 0; i < n; ++i) {
        const CorruptionMask mask = make_mask(h, w, config_.level, run_rng_);
        Tensor<float> single(Shape{clean_batch.shape()[1], h, w});
        std::copy(clean_batch.data() + i * single.size(),
                  clean_batch.data() + (i + 1) * single.size(), single.data());
        single = apply_mask(single, mask, float(config_.fill_value));
        std::copy(single.values().begin(), single.values().end(),
                  corrupted.data() + i * single.size());
    }

    // one generator forward feeds both phases
    auto h_hat = generator_->forward(make_constant(corrupted), Mode::train);

    LossReport report;

    // discriminator step: real vs detached fake, freshly smoothed targets
    opt_d_.zero_grad();
    auto targets = real_targets_batch<float>(n, h, w, run_rng_);
    auto d_real = discriminator_->forward(make_constant(clean_batch), Mode::train);
    auto d_fake_detached = discriminator_->forward(detach(h_hat), Mode::train);
    auto d_loss = discriminator_loss(d_real, d_fake_detached, targets);
    report.loss_r = double(d_loss.real->value[0]);
    report.loss_f = double(d_loss.fake->value[0]);
    report.loss_d = report.loss_f + report.loss_r; // the decomposition identity, exactly
    backward(d_loss.total);
    opt_d_.step(float(lr));

    // generator step through the refreshed, frozen discriminator: gradient
    // flows through D into the generator but no D weight grads are computed
    opt_g_.zero_grad();
    {
        FreezeParams<float> freeze(discriminator_->parameters());
        auto d_fake = discriminator_->forward(h_hat, Mode::train);
        auto g_loss = generator_loss(h_hat, clean_batch, d_fake);
        report.loss_g_content = double(g_loss.content->value[0]);
        report.loss_g_adv = double(g_loss.adv->value[0]);
        report.loss_g = report.loss_g_content + 1e-3 * report.loss_g_adv;
        backward(g_loss.total);
    }
    opt_g_.step(float(lr));

    check_finite_report(report);
    return report;
}

std::filesystem::path Trainer::train(std::uint64_t stop_after_epochs) {
    const std::uint64_t stop = stop_after_epochs ? std::min(stop_after_epochs, config_.epochs)
                                                 : config_.epochs;
    const auto splits = scan_dataset(config_.dataset_root, config_.dataset_name,
                                     SplitRule{config_.train_fraction, config_.seed});
    const DatasetManifest& manifest = splits.train;
    if (manifest.size() == 0) throw ValueError("training split is empty");

    // resize once up front; [0,1] space
    std::vector<Tensor<float>> images01;
    images01.reserve(manifest.size());
    for (std::size_t id = 0; id < manifest.size(); ++id) {
        ImageRecord record = load_image(manifest.full_path(id));
        images01.push_back(
            resize_bilinear(record.pixels, config_.image_size, config_.image_size));
    }

    std::filesystem::create_directories(config_.checkpoint_dir);
    const std::filesystem::path metrics_path = config_.resolved_metrics_path();
    std::ofstream metrics;
    if (completed_epochs_ == 0) {
        metrics.open(metrics_path, std::ios::trunc);
        metrics << "epoch,lr,loss_D,loss_G,nmse\n";
    } else {
        metrics.open(metrics_path, std::ios::app); // resumed run appends
    }
    if (!metrics) throw IoError("cannot open metrics file " + metrics_path.string());

    std::filesystem::path last_checkpoint;
    for (std::uint64_t epoch = completed_epochs_; epoch < stop; ++epoch) {
        const double lr = lr_at_epoch(config_, epoch);

        std::vector<std::size_t> order(manifest.size());
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
        run_rng_.shuffle(order);

        double sum_loss_d = 0.0, sum_loss_g = 0.0;
        std::size_t steps = 0;
        for (std::size_t start = 0; start < order.size(); start += config_.batch_size) {
            const std::size_t count = std::min<std::size_t>(config_.batch_size,
                                                            order.size() - start);
            std::vector<Tensor<float>> batch_pm1;
            batch_pm1.reserve(count);
            std::vector<const Tensor<float>*> ptrs;
            for (std::size_t i = 0; i < count; ++i) {
                batch_pm1.push_back(normalize(images01[order[start + i]]));
                ptrs.push_back(&batch_pm1.back());
            }
            const LossReport report = train_step(stack_batch(ptrs), lr);
            sum_loss_d += report.loss_d;
            sum_loss_g += report.loss_g;
            ++steps;
        }

        completed_epochs_ = epoch + 1;

        // train-subset NMSE with fixed per-image masks (seed ^ id)
        const std::size_t subset =
            std::min<std::size_t>(config_.nmse_subset ? config_.nmse_subset : manifest.size(),
                                  manifest.size());
        std::vector<std::pair<Tensor<float>, Tensor<float>>> pairs;
        pairs.reserve(subset);
        for (std::size_t id = 0; id < subset; ++id) {
            const CorruptionMask mask = make_mask(config_.image_size, config_.image_size,
                                                  config_.level, config_.seed ^ id);
            Tensor<float> corrupted =
                apply_mask(normalize(images01[id]), mask, float(config_.fill_value));
            Tensor<float> single(Shape{1, 3, config_.image_size, config_.image_size},
                                 std::vector<float>(corrupted.values().begin(),
                                                    corrupted.values().end()));
            Tensor<float> out = forward_tensor(*generator_, single, Mode::eval);
            Tensor<float> flat =
                out.reshaped(Shape{3, config_.image_size, config_.image_size});
            if (config_.nmse_denormalized)
                pairs.emplace_back(images01[id], denormalize(flat));
            else
                pairs.emplace_back(normalize(images01[id]), flat);
        }
        const double epoch_nmse = nmse_dataset(pairs).mean;

        metrics << epoch << ',' << format_double(lr) << ','
                << format_double(sum_loss_d / double(steps)) << ','
                << format_double(sum_loss_g / double(steps)) << ','
                << format_double(epoch_nmse) << '\n'
                << std::flush;
        if (!metrics) throw IoError("write failed for " + metrics_path.string());

        if (completed_epochs_ % config_.checkpoint_every == 0 ||
            completed_epochs_ == stop) {
            last_checkpoint = std::filesystem::path(config_.checkpoint_dir) /
                              ("ckpt_epoch_" + std::to_string(completed_epochs_) + ".ssrg");
            save_checkpoint(make_checkpoint(), last_checkpoint);
        }
    }
    return last_checkpoint;
}

EvaluationResult Trainer::evaluate(const DatasetManifest& manifest, double level,
                                   std::uint64_t seed, std::size_t limit) {
    if (manifest.size() == 0) throw ValueError("evaluate: empty manifest");
    const std::size_t count = limit ? std::min(limit, manifest.size()) : manifest.size();

    std::vector<std::pair<Tensor<float>, Tensor<float>>> model_pairs, baseline_pairs;
    model_pairs.reserve(count);
    baseline_pairs.reserve(count);
    for (std::size_t id = 0; id < count; ++id) {
        ImageRecord record = load_image(manifest.full_path(id));
        Tensor<float> clean01 =
            resize_bilinear(record.pixels, config_.image_size, config_.image_size);
        const CorruptionMask mask =
            make_mask(config_.image_size, config_.image_size, level, seed ^ id);
        Tensor<float> corrupted =
            apply_mask(normalize(clean01), mask, float(config_.fill_value));
        Tensor<float> single(Shape{1, 3, config_.image_size, config_.image_size},
                             std::vector<float>(corrupted.values().begin(),
                                                corrupted.values().end()));
        Tensor<float> out = forward_tensor(*generator_, single, Mode::eval);
        Tensor<float> flat = out.reshaped(Shape{3, config_.image_size, config_.image_size});

        if (config_.nmse_denormalized) {
            model_pairs.emplace_back(clean01, denormalize(flat));
            baseline_pairs.emplace_back(clean01, denormalize(corrupted));
        } else {
            model_pairs.emplace_back(normalize(clean01), flat);
            baseline_pairs.emplace_back(normalize(clean01), corrupted);
        }
    }

    EvaluationResult result;
    result.model = nmse_dataset(model_pairs);
    result.baseline = nmse_dataset(baseline_pairs);
    return result;
}

} // namespace ssrgan
