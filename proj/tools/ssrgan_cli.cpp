// ssrgan: image inpainting with a semi-super-resolution GAN.
//
// Subcommands: corrupt, train, eval, infer, sweep, report, gradcheck.
// Exit codes: 0 success, 2 usage/empty input, 3 unwritable output,
// 4 malformed CSV, 5 checkpoint/model mismatch, 1 other failure.
#include <algorithm>
#include <charconv>
#include <fstream>
#include <iostream>
#include <map>

#include <CLI11.hpp>

#include "ssrgan/gradcheck.hpp"
#include "ssrgan/plot.hpp"
#include "ssrgan/training.hpp"

using namespace ssrgan;

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitOutput = 3;
constexpr int kExitCsv = 4;
constexpr int kExitCheckpoint = 5;

std::string fmt(double v) {
    char buffer[32];
    auto [end, ec] = std::to_chars(buffer, buffer + sizeof(buffer), v);
    return std::string(buffer, end);
}

TrainConfig load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("config " + path + ": " + e.what());
    }
    return config_from_json(j);
}

std::vector<std::filesystem::path> list_images(const std::filesystem::path& dir) {
    std::vector<std::filesystem::path> files;
    if (!std::filesystem::is_directory(dir)) return files;
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
        if (!entry.is_regular_file()) continue;
        std::string ext = entry.path().extension().string();
        std::transform(ext.begin(), ext.end(), ext.begin(),
                       [](unsigned char c) { return char(std::tolower(c)); });
        if (ext == ".png" || ext == ".ppm" || ext == ".pgm") files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    return files;
}

// --- corrupt: resize, mask, write PNG + PGM sidecar mask ---
int cmd_corrupt(const std::string& input_dir, const std::string& output_dir, double level,
                std::uint64_t seed, std::size_t size) {
    if (level < 0.0 || level > 1.0) {
        std::cerr << "error: --level " << level << " outside [0,1]\n";
        return kExitUsage;
    }
    const auto files = list_images(input_dir);
    if (files.empty()) {
        std::cerr << "error: no readable images in " << input_dir << "\n";
        return kExitUsage;
    }
    std::error_code ec;
    std::filesystem::create_directories(output_dir, ec);
    if (ec || !std::filesystem::is_directory(output_dir)) {
        std::cerr << "error: cannot create output directory " << output_dir << "\n";
        return kExitOutput;
    }

    std::size_t processed = 0;
    for (std::size_t id = 0; id < files.size(); ++id) {
        ImageRecord record = load_image(files[id]);
        Tensor<float> clean01 = resize_bilinear(record.pixels, size, size);
        const CorruptionMask mask = make_mask(size, size, level, seed ^ id);
        Tensor<float> corrupted01 = denormalize(apply_mask(normalize(clean01), mask));

        const std::string stem = files[id].stem().string();
        try {
            save_png(std::filesystem::path(output_dir) / (stem + ".png"),
                     to_image(corrupted01));
            Image mask_img;
            mask_img.width = std::uint32_t(size);
            mask_img.height = std::uint32_t(size);
            mask_img.channels = 1;
            mask_img.pixels.resize(size * size);
            for (std::size_t i = 0; i < size * size; ++i)
                mask_img.pixels[i] = mask.corrupted[i] ? 255 : 0;
            save_pgm(std::filesystem::path(output_dir) / (stem + "_mask.pgm"), mask_img);
        } catch (const IoError& e) {
            std::cerr << "error: " << e.what() << "\n";
            return kExitOutput;
        }
        ++processed;
    }
    std::cout << processed << " images corrupted at level " << level << " -> " << output_dir
              << "\n";
    return 0;
}

// --- eval helpers shared by eval/sweep ---
void append_eval_row(const std::filesystem::path& csv, const std::string& dataset, double level,
                     std::uint64_t epoch, double nmse_mean, std::size_t n_images) {
    const bool fresh = !std::filesystem::exists(csv);
    std::ofstream out(csv, std::ios::app);
    if (!out) throw IoError("cannot open " + csv.string());
    if (fresh) out << "dataset,corruption_level,epoch,nmse_mean,n_images\n";
    out << dataset << ',' << fmt(level) << ',' << epoch << ',' << fmt(nmse_mean) << ','
        << n_images << '\n';
}

int cmd_train(TrainConfig cfg, const std::string& resume_from) {
    Trainer trainer = resume_from.empty() ? Trainer(std::move(cfg))
                                          : Trainer::from_checkpoint(resume_from);
    const TrainConfig& active = trainer.config();
    if (trainer.completed_epochs() >= active.epochs) {
        std::cout << "nothing to do: checkpoint already at epoch "
                  << trainer.completed_epochs() << " of " << active.epochs << "\n";
        return 0;
    }
    std::cout << "training " << active.dataset_name << " at level " << active.level
              << (resume_from.empty()
                      ? ""
                      : " (resuming from epoch " + std::to_string(trainer.completed_epochs()) + ")")
              << " for " << active.epochs << " epochs\n";
    const auto ckpt = trainer.train();
    std::cout << "final checkpoint: " << ckpt.string() << "\n";
    std::cout << "metrics: " << active.resolved_metrics_path() << "\n";
    return 0;
}

int cmd_eval(const std::string& checkpoint, double level, std::uint64_t seed,
             const std::string& split, std::size_t limit, const std::string& out_csv) {
    Trainer trainer = Trainer::from_checkpoint(checkpoint);
    const TrainConfig& cfg = trainer.config();
    const auto splits = scan_dataset(cfg.dataset_root, cfg.dataset_name,
                                     SplitRule{cfg.train_fraction, cfg.seed});
    const DatasetManifest& manifest = split == "train" ? splits.train : splits.test;
    if (manifest.size() == 0) {
        std::cerr << "error: " << split << " split is empty\n";
        return kExitUsage;
    }
    const auto result = trainer.evaluate(manifest, level, seed, limit);
    std::cout << "nmse " << fmt(result.model.mean) << " over " << result.model.count
              << " images (baseline " << fmt(result.baseline.mean) << ") at level " << level
              << "\n";
    if (!out_csv.empty())
        append_eval_row(out_csv, cfg.dataset_name, level, trainer.completed_epochs(),
                        result.model.mean, result.model.count);
    return 0;
}

int cmd_infer(const std::string& checkpoint, const std::string& image_path, double level,
              std::uint64_t seed, const std::string& out_path) {
    Trainer trainer = Trainer::from_checkpoint(checkpoint);
    const std::size_t size = trainer.config().image_size;

    ImageRecord record = load_image(image_path);
    Tensor<float> clean01 = resize_bilinear(record.pixels, size, size);
    const CorruptionMask mask = make_mask(size, size, level, seed);
    Tensor<float> corrupted = apply_mask(normalize(clean01), mask);

    Tensor<float> batch(Shape{1, 3, size, size},
                        std::vector<float>(corrupted.values().begin(),
                                           corrupted.values().end()));
    Tensor<float> out = forward_tensor(trainer.generator(), batch, Mode::eval);
    Tensor<float> restored01 = denormalize(out.reshaped(Shape{3, size, size}));
    Tensor<float> corrupted01 = denormalize(corrupted);

    const double score = nmse(clean01, restored01);

    // triptych: original | corrupted | reconstructed, 1-pixel black separators
    const std::size_t W = size, H = size;
    Image canvas;
    canvas.width = std::uint32_t(3 * W + 2);
    canvas.height = std::uint32_t(H);
    canvas.channels = 3;
    canvas.pixels.assign(canvas.width * canvas.height * 3, 0);
    const Image panels[3] = {to_image(clean01), to_image(corrupted01), to_image(restored01)};
    for (std::size_t p = 0; p < 3; ++p) {
        const std::size_t x0 = p * (W + 1);
        for (std::size_t y = 0; y < H; ++y)
            for (std::size_t x = 0; x < W; ++x)
                for (std::size_t c = 0; c < 3; ++c)
                    canvas.pixels[(y * canvas.width + x0 + x) * 3 + c] =
                        panels[p].pixels[(y * W + x) * 3 + c];
    }
    save_png(out_path, canvas);
    std::cout << "nmse " << fmt(score) << "\n";
    std::cout << "triptych: " << out_path << "\n";
    return 0;
}

int cmd_sweep(TrainConfig base, const std::vector<double>& levels, const std::string& out_dir,
              std::size_t eval_limit) {
    for (double level : levels)
        if (level < 0.0 || level > 1.0) {
            std::cerr << "error: sweep level " << level << " outside [0,1]\n";
            return kExitUsage;
        }
    std::filesystem::create_directories(out_dir);

    const auto level_csv = std::filesystem::path(out_dir) / "nmse_vs_level.csv";
    std::filesystem::remove(level_csv);

    for (double level : levels) {
        TrainConfig cfg = base;
        cfg.level = level;
        char tag[32];
        std::snprintf(tag, sizeof(tag), "p_%.2f", level);
        cfg.checkpoint_dir = (std::filesystem::path(out_dir) / tag).string();
        cfg.metrics_path.clear();

        std::cout << "=== level " << level << " ===\n";
        Trainer trainer(cfg);
        trainer.train();

        const auto splits = scan_dataset(cfg.dataset_root, cfg.dataset_name,
                                         SplitRule{cfg.train_fraction, cfg.seed});
        const DatasetManifest& manifest =
            splits.test.size() ? splits.test : splits.train;
        const auto result = trainer.evaluate(manifest, level, cfg.seed, eval_limit);
        append_eval_row(level_csv, cfg.dataset_name, level, trainer.completed_epochs(),
                        result.model.mean, result.model.count);
        std::cout << "level " << level << ": test nmse " << fmt(result.model.mean)
                  << " (baseline " << fmt(result.baseline.mean) << ")\n";
    }
    std::cout << "sweep results: " << level_csv.string() << "\n";
    return 0;
}

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
};

CsvTable read_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    CsvTable table;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::vector<std::string> fields;
        std::size_t start = 0;
        for (;;) {
            const auto comma = line.find(',', start);
            fields.push_back(line.substr(start, comma - start));
            if (comma == std::string::npos) break;
            start = comma + 1;
        }
        if (line_no == 1) {
            table.header = fields;
        } else {
            if (fields.size() != table.header.size())
                throw FormatError(path.string() + ":" + std::to_string(line_no) +
                                  ": expected " + std::to_string(table.header.size()) +
                                  " fields, got " + std::to_string(fields.size()));
            table.rows.push_back(fields);
        }
    }
    return table;
}

double parse_field(const std::string& s, const std::filesystem::path& file) {
    try {
        return std::stod(s);
    } catch (const std::exception&) {
        throw FormatError(file.string() + ": non-numeric field '" + s + "'");
    }
}

int cmd_report(const std::string& runs_dir, const std::string& out_dir) {
    if (!std::filesystem::is_directory(runs_dir)) {
        std::cerr << "error: " << runs_dir << " is not a directory\n";
        return kExitUsage;
    }

    // collect per-epoch metrics from each run directory plus any sweep
    // nmse_vs_level.csv rows
    struct EpochRow {
        double level, epoch, lr, loss_d, loss_g, nmse;
    };
    std::vector<EpochRow> epoch_rows;
    std::vector<std::array<std::string, 5>> level_rows;

    // fixed processing order regardless of directory iteration order
    std::vector<std::filesystem::path> candidates;
    for (const auto& entry : std::filesystem::recursive_directory_iterator(runs_dir))
        if (entry.is_regular_file()) candidates.push_back(entry.path());
    std::sort(candidates.begin(), candidates.end());

    try {
        for (const auto& path : candidates) {
            if (path.filename() == "metrics.csv") {
                // the run's level comes from a neighboring checkpoint config
                double level = -1.0;
                for (const auto& sibling :
                     std::filesystem::directory_iterator(path.parent_path()))
                    if (sibling.path().extension() == ".ssrg") {
                        level = load_checkpoint(sibling.path()).config.level;
                        break;
                    }
                const CsvTable table = read_csv(path);
                for (const auto& row : table.rows)
                    epoch_rows.push_back({level, parse_field(row[0], path),
                                          parse_field(row[1], path), parse_field(row[2], path),
                                          parse_field(row[3], path),
                                          parse_field(row[4], path)});
            } else if (path.filename() == "nmse_vs_level.csv") {
                const CsvTable table = read_csv(path);
                for (const auto& row : table.rows) {
                    parse_field(row[1], path); // validate numerics
                    parse_field(row[3], path);
                    level_rows.push_back({row[0], row[1], row[2], row[3], row[4]});
                }
            }
        }
    } catch (const FormatError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitCsv;
    }

    if (epoch_rows.empty() && level_rows.empty()) {
        std::cerr << "error: no metrics.csv or nmse_vs_level.csv under " << runs_dir << "\n";
        return kExitUsage;
    }

    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec || !std::filesystem::is_directory(out_dir)) {
        std::cerr << "error: cannot create " << out_dir << "\n";
        return kExitOutput;
    }
    const auto out = std::filesystem::path(out_dir);

    if (!epoch_rows.empty()) {
        std::stable_sort(epoch_rows.begin(), epoch_rows.end(),
                         [](const EpochRow& a, const EpochRow& b) {
                             return a.level != b.level ? a.level < b.level : a.epoch < b.epoch;
                         });
        std::ofstream csv(out / "nmse_vs_epoch.csv", std::ios::trunc);
        csv << "corruption_level,epoch,lr,loss_D,loss_G,nmse\n";
        for (const auto& r : epoch_rows)
            csv << fmt(r.level) << ',' << fmt(r.epoch) << ',' << fmt(r.lr) << ','
                << fmt(r.loss_d) << ',' << fmt(r.loss_g) << ',' << fmt(r.nmse) << '\n';

        // one series per corruption level
        std::map<double, PlotSeries> by_level;
        for (const auto& r : epoch_rows) {
            by_level[r.level].x.push_back(r.epoch);
            by_level[r.level].y.push_back(r.nmse);
        }
        std::vector<PlotSeries> series;
        for (auto& [lvl, s] : by_level) series.push_back(std::move(s));
        save_png(out / "nmse_vs_epoch.png", render_line_chart(series));
    }

    if (!level_rows.empty()) {
        std::sort(level_rows.begin(), level_rows.end(), [](const auto& a, const auto& b) {
            return std::stod(a[1]) < std::stod(b[1]);
        });
        std::ofstream csv(out / "nmse_vs_level.csv", std::ios::trunc);
        csv << "dataset,corruption_level,epoch,nmse_mean,n_images\n";
        for (const auto& r : level_rows)
            csv << r[0] << ',' << r[1] << ',' << r[2] << ',' << r[3] << ',' << r[4] << '\n';

        PlotSeries series;
        for (const auto& r : level_rows) {
            series.x.push_back(std::stod(r[1]));
            series.y.push_back(std::stod(r[3]));
        }
        save_png(out / "nmse_vs_level.png", render_line_chart({series}));
    }

    std::cout << "report written to " << out_dir << "\n";
    return 0;
}

int cmd_gradcheck(std::uint64_t seed) {
    // the 64-bit finite-difference sweep across every layer kind
    Rng rng(seed);
    int failures = 0;
    auto report = [&](const std::string& name, const GradCheckResult& result, double tol) {
        const bool ok = result.passed(tol);
        std::cout << (ok ? "PASS " : "FAIL ") << name << ": max rel error "
                  << fmt(result.max_rel_error) << " over " << result.elements_checked
                  << " elements (tol " << fmt(tol) << ")\n";
        if (!ok) ++failures;
    };

    {
        auto x = make_parameter(Tensor<double>::uniform({2, 3, 6, 6}, -1.0, 1.0, rng), "x");
        auto w = make_parameter(Tensor<double>::uniform({4, 3, 3, 3}, -0.5, 0.5, rng), "w");
        auto b = make_parameter(Tensor<double>::uniform({4}, -0.5, 0.5, rng), "b");
        auto target = Tensor<double>::zeros(conv2d(x, w, b, 1, 1)->value.shape());
        report("conv2d k3/s1/p1",
               check_gradients<double>(
                   [&] { return mse(conv2d(x, w, b, 1, 1), make_constant(target)); }, {x, w, b}),
               1e-6);
    }
    {
        auto x = make_parameter(Tensor<double>::uniform({1, 4, 3, 3}, -1.0, 1.0, rng), "x");
        auto w = make_parameter(Tensor<double>::uniform({4, 2, 4, 4}, -0.5, 0.5, rng), "w");
        auto b = make_parameter(Tensor<double>::uniform({2}, -0.5, 0.5, rng), "b");
        auto target = Tensor<double>::zeros(transpose_conv2d(x, w, b, 4, 0)->value.shape());
        report("transpose_conv2d k4/s4",
               check_gradients<double>(
                   [&] { return mse(transpose_conv2d(x, w, b, 4, 0), make_constant(target)); },
                   {x, w, b}),
               1e-6);
    }
    {
        auto x = make_parameter(Tensor<double>::uniform({1, 8, 4, 4}, -1.0, 1.0, rng), "x");
        auto target = Tensor<double>::zeros({1, 2, 8, 8});
        report("pixel_shuffle r2",
               check_gradients<double>(
                   [&] { return mse(pixel_shuffle(x, 2), make_constant(target)); }, {x}),
               1e-6);
    }
    {
        auto x = make_parameter(Tensor<double>::uniform({2, 3, 4, 4}, -2.0, 2.0, rng), "x");
        auto gamma = make_parameter(Tensor<double>::uniform({3}, 0.5, 1.5, rng), "gamma");
        auto beta = make_parameter(Tensor<double>::uniform({3}, -0.5, 0.5, rng), "beta");
        Tensor<double> rm = Tensor<double>::zeros({3});
        Tensor<double> rv = Tensor<double>::ones({3});
        auto target = Tensor<double>::zeros({2, 3, 4, 4});
        report("batch_norm (train)",
               check_gradients<double>(
                   [&] {
                       return mse(batch_norm2d(x, gamma, beta, rm, rv, Mode::train, 0.9, 1e-5),
                                  make_constant(target));
                   },
                   {x, gamma, beta}),
               1e-6);
    }
    {
        Rng init(2);
        ResidualBlock<double> block(3, true, init, "res");
        auto x = make_parameter(Tensor<double>::uniform({2, 3, 4, 4}, 0.1, 1.0, rng), "x");
        std::vector<NodePtr<double>> leaves{x};
        block.collect_parameters(leaves);
        auto target = Tensor<double>::zeros({2, 3, 4, 4});
        report("residual block",
               check_gradients<double>(
                   [&] { return mse(block.forward(x, Mode::train), make_constant(target)); },
                   leaves),
               1e-6);
    }
    {
        auto h = Tensor<double>::uniform({1, 3, 4, 4}, -1.0, 1.0, rng);
        auto h_hat = make_parameter(Tensor<double>::uniform({1, 3, 4, 4}, -1.0, 1.0, rng), "hh");
        auto d_fake = make_parameter(Tensor<double>::uniform({1, 1, 4, 4}, 0.1, 0.9, rng), "df");
        report("generator loss",
               check_gradients<double>([&] { return generator_loss(h_hat, h, d_fake).total; },
                                       {h_hat, d_fake}),
               1e-6);

        auto d_real = make_parameter(Tensor<double>::uniform({1, 1, 4, 4}, 0.1, 0.9, rng), "dr");
        Rng alpha(3);
        auto targets = real_targets_batch<double>(1, 4, 4, alpha);
        report("discriminator loss",
               check_gradients<double>(
                   [&] { return discriminator_loss(d_real, detach(d_fake), targets).total; },
                   {d_real}),
               1e-6);
    }

    std::cout << (failures ? "gradcheck FAILED\n" : "gradcheck passed\n");
    return failures ? 1 : 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"SSRGAN image inpainting"};
    app.require_subcommand(1);

    // corrupt
    auto* corrupt = app.add_subcommand("corrupt", "corrupt images with uniform pixel masks");
    std::string in_dir, out_dir;
    double level = 0.3;
    std::uint64_t seed = 0;
    std::size_t size = 128;
    corrupt->add_option("--input", in_dir, "input image directory")->required();
    corrupt->add_option("--output", out_dir, "output directory")->required();
    corrupt->add_option("--level", level, "corruption level in [0,1]");
    corrupt->add_option("--seed", seed, "mask seed");
    corrupt->add_option("--size", size, "working resolution");

    // train
    auto* train = app.add_subcommand("train", "train a model");
    std::string config_path, dataset_root, ckpt_dir;
    std::uint64_t train_seed = 0;
    bool seed_set = false;
    std::string resume_from;
    train->add_option("--config", config_path, "JSON config file (TrainConfig fields)");
    train->add_option("--resume", resume_from, "continue from this checkpoint (ignores --config)");
    train->add_option("--dataset", dataset_root, "dataset root (overrides config)");
    train->add_option("--checkpoint-dir", ckpt_dir, "checkpoint directory (overrides config)");
    train->add_option("--seed", train_seed, "run seed (overrides config)")
        ->each([&](const std::string&) { seed_set = true; });

    // eval
    auto* eval = app.add_subcommand("eval", "evaluate a checkpoint on a dataset split");
    std::string eval_ckpt, eval_split = "test", eval_csv;
    double eval_level = 0.3;
    std::uint64_t eval_seed = 0;
    std::size_t eval_limit = 0;
    eval->add_option("--checkpoint", eval_ckpt, "checkpoint file")->required();
    eval->add_option("--level", eval_level, "corruption level");
    eval->add_option("--seed", eval_seed, "evaluation mask seed");
    eval->add_option("--split", eval_split, "train or test")
        ->check(CLI::IsMember({"train", "test"}));
    eval->add_option("--limit", eval_limit, "evaluate at most N images (0 = all)");
    eval->add_option("--out-csv", eval_csv, "append a result row to this CSV");

    // infer
    auto* infer = app.add_subcommand("infer", "corrupt and reconstruct one image");
    std::string infer_ckpt, infer_image, infer_out = "triptych.png";
    double infer_level = 0.3;
    std::uint64_t infer_seed = 0;
    infer->add_option("--checkpoint", infer_ckpt, "checkpoint file")->required();
    infer->add_option("--image", infer_image, "input image")->required();
    infer->add_option("--level", infer_level, "corruption level");
    infer->add_option("--seed", infer_seed, "mask seed");
    infer->add_option("--out", infer_out, "triptych output path");

    // sweep
    auto* sweep = app.add_subcommand("sweep", "train one model per corruption level");
    std::string sweep_config, sweep_out = "sweep";
    std::vector<double> sweep_levels = {0.3, 0.4, 0.5, 0.6, 0.7, 0.8};
    std::size_t sweep_eval_limit = 0;
    std::uint64_t sweep_seed = 0;
    bool sweep_seed_set = false;
    sweep->add_option("--config", sweep_config, "JSON config file")->required();
    sweep->add_option("--levels", sweep_levels, "corruption levels")->delimiter(',');
    sweep->add_option("--out", sweep_out, "sweep output directory");
    sweep->add_option("--eval-limit", sweep_eval_limit, "evaluate at most N test images");
    sweep->add_option("--seed", sweep_seed, "run seed (overrides config)")
        ->each([&](const std::string&) { sweep_seed_set = true; });

    // report
    auto* report = app.add_subcommand("report", "merge run CSVs and plot the curves");
    std::string report_runs, report_out = "report";
    std::uint64_t report_seed = 0;
    report->add_option("--runs", report_runs, "directory of run outputs")->required();
    report->add_option("--out", report_out, "report output directory");
    report->add_option("--seed", report_seed, "accepted for interface symmetry; report is deterministic");

    // gradcheck
    auto* gradcheck = app.add_subcommand("gradcheck",
                                         "finite-difference check of every layer (64-bit)");
    std::uint64_t gradcheck_seed = 1;
    gradcheck->add_option("--seed", gradcheck_seed, "seed for the random instances");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e); // --help
        app.exit(e);
        return kExitUsage;
    }

    try {
        if (corrupt->parsed()) return cmd_corrupt(in_dir, out_dir, level, seed, size);
        if (train->parsed()) {
            TrainConfig cfg = config_path.empty() ? TrainConfig{} : load_config_file(config_path);
            if (!dataset_root.empty()) cfg.dataset_root = dataset_root;
            if (!ckpt_dir.empty()) cfg.checkpoint_dir = ckpt_dir;
            if (seed_set) cfg.seed = train_seed;
            return cmd_train(std::move(cfg), resume_from);
        }
        if (eval->parsed())
            return cmd_eval(eval_ckpt, eval_level, eval_seed, eval_split, eval_limit, eval_csv);
        if (infer->parsed())
            return cmd_infer(infer_ckpt, infer_image, infer_level, infer_seed, infer_out);
        if (sweep->parsed()) {
            TrainConfig cfg = load_config_file(sweep_config);
            if (sweep_seed_set) cfg.seed = sweep_seed;
            return cmd_sweep(std::move(cfg), sweep_levels, sweep_out, sweep_eval_limit);
        }
        if (report->parsed()) return cmd_report(report_runs, report_out);
        if (gradcheck->parsed()) return cmd_gradcheck(gradcheck_seed);
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const ValueError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const CheckpointError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitCheckpoint;
    } catch (const ShapeError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitCheckpoint; // checkpoint/model mismatch surfaces as shape errors
    } catch (const FormatError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitCsv;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
