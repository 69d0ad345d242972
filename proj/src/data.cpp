#include "ssrgan/data.hpp"

#include <algorithm>
#include <fstream>
#include <set>

#include "ssrgan/errors.hpp"
#include "ssrgan/rng.hpp"

namespace ssrgan {

namespace {

bool has_image_extension(const std::filesystem::path& path) {
    std::string ext = path.extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(),
                   [](unsigned char c) { return char(std::tolower(c)); });
    return ext == ".png" || ext == ".ppm" || ext == ".pgm";
}

std::vector<std::string> read_lines(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (!line.empty()) lines.push_back(line);
    }
    return lines;
}

DatasetManifest make_manifest(std::string name, Split split, std::filesystem::path root,
                              std::vector<std::string> paths) {
    std::sort(paths.begin(), paths.end()); // byte-wise, platform independent
    DatasetManifest manifest;
    manifest.name = std::move(name);
    manifest.split = split;
    manifest.root = std::move(root);
    manifest.paths = std::move(paths);
    return manifest;
}

} // namespace

DatasetSplits scan_dataset(const std::filesystem::path& root, const std::string& name,
                           const SplitRule& rule) {
    if (!std::filesystem::is_directory(root))
        throw IoError("dataset root " + root.string() + " is not a directory");

    const auto train_list = root / "train.txt";
    const auto test_list = root / "test.txt";
    if (std::filesystem::exists(train_list) && std::filesystem::exists(test_list)) {
        DatasetSplits splits;
        splits.train = make_manifest(name, Split::train, root, read_lines(train_list));
        splits.test = make_manifest(name, Split::test, root, read_lines(test_list));
        if (splits.train.paths.empty() && splits.test.paths.empty())
            throw ValueError("dataset " + root.string() + " split files are empty");
        return splits;
    }

    std::vector<std::string> all;
    for (const auto& entry : std::filesystem::recursive_directory_iterator(root)) {
        if (!entry.is_regular_file() || !has_image_extension(entry.path())) continue;
        all.push_back(entry.path().lexically_relative(root).generic_string());
    }
    if (all.empty()) throw ValueError("dataset " + root.string() + " contains no images");
    std::sort(all.begin(), all.end());

    // seeded assignment: shuffle ids, first fraction goes to train
    std::vector<std::size_t> order(all.size());
    for (std::size_t i = 0; i < all.size(); ++i) order[i] = i;
    Rng rng(rule.seed);
    rng.shuffle(order);
    const std::size_t n_train = std::size_t(rule.train_fraction * double(all.size()));

    std::vector<std::string> train_paths, test_paths;
    std::set<std::size_t> train_ids(order.begin(), order.begin() + long(n_train));
    for (std::size_t i = 0; i < all.size(); ++i) {
        if (train_ids.count(i))
            train_paths.push_back(all[i]);
        else
            test_paths.push_back(all[i]);
    }

    DatasetSplits splits;
    splits.train = make_manifest(name, Split::train, root, std::move(train_paths));
    splits.test = make_manifest(name, Split::test, root, std::move(test_paths));
    return splits;
}

void save_manifest(const DatasetManifest& manifest, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    for (std::size_t id = 0; id < manifest.paths.size(); ++id)
        out << id << '\t' << manifest.paths[id] << '\n';
    if (!out) throw IoError("write failed for " + path.string());
}

DatasetManifest load_manifest(const std::filesystem::path& path,
                              const std::filesystem::path& root) {
    DatasetManifest manifest;
    manifest.root = root;
    std::size_t expected = 0;
    for (const std::string& line : read_lines(path)) {
        const auto tab = line.find('\t');
        if (tab == std::string::npos)
            throw FormatError("manifest " + path.string() + ": missing tab in line");
        std::size_t id = 0;
        try {
            id = std::stoull(line.substr(0, tab));
        } catch (const std::exception&) {
            throw FormatError("manifest " + path.string() + ": non-numeric id '" +
                              line.substr(0, tab) + "'");
        }
        if (id != expected)
            throw FormatError("manifest " + path.string() + ": ids not contiguous at " +
                              std::to_string(id));
        manifest.paths.push_back(line.substr(tab + 1));
        ++expected;
    }
    return manifest;
}

} // namespace ssrgan
