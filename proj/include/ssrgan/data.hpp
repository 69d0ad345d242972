#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "ssrgan/image.hpp"

namespace ssrgan {

enum class Split { train, test };

/// Deterministic listing of a dataset split: entries sorted lexicographically
/// by relative path, ids contiguous from 0 in that order.
struct DatasetManifest {
    std::string name;
    Split split = Split::train;
    std::filesystem::path root;
    std::vector<std::string> paths; // index == id

    std::size_t size() const { return paths.size(); }
    std::filesystem::path full_path(std::size_t id) const { return root / paths[id]; }
};

struct SplitRule {
    double train_fraction = 0.8;
    std::uint64_t seed = 0;
};

struct DatasetSplits {
    DatasetManifest train;
    DatasetManifest test;
};

/// Scans `root` recursively for loadable images (.png/.ppm/.pgm). When
/// `root/train.txt` and `root/test.txt` exist they define the split (one
/// relative path per line); otherwise a seeded shuffle assigns the first
/// `train_fraction` of files to train.
DatasetSplits scan_dataset(const std::filesystem::path& root, const std::string& name,
                           const SplitRule& rule);

/// Line-delimited `id<TAB>relpath` serialization.
void save_manifest(const DatasetManifest& manifest, const std::filesystem::path& path);
DatasetManifest load_manifest(const std::filesystem::path& path,
                              const std::filesystem::path& root);

} // namespace ssrgan
