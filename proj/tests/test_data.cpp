#include <doctest.h>

#include <fstream>

#include "ssrgan/data.hpp"

using namespace ssrgan;

namespace {

std::filesystem::path fresh_dir(const std::string& name) {
    auto dir = std::filesystem::temp_directory_path() / "ssrgan_data_tests" / name;
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

void write_tiny_ppm(const std::filesystem::path& path, std::uint8_t shade) {
    Image img;
    img.width = 4;
    img.height = 4;
    img.channels = 3;
    img.pixels.assign(48, shade);
    save_ppm(path, img);
}

} // namespace

TEST_CASE("scan produces deterministic lexicographic manifests") {
    const auto root = fresh_dir("scan");
    std::filesystem::create_directories(root / "sub");
    write_tiny_ppm(root / "b.ppm", 10);
    write_tiny_ppm(root / "a.ppm", 20);
    write_tiny_ppm(root / "sub" / "c.ppm", 30);
    {
        std::ofstream skip(root / "notes.txt");
        skip << "not an image";
    }

    auto splits = scan_dataset(root, "toy", SplitRule{1.0, 7});
    CHECK(splits.train.size() == 3);
    CHECK(splits.test.size() == 0);
    CHECK(splits.train.paths[0] == "a.ppm");
    CHECK(splits.train.paths[1] == "b.ppm");
    CHECK(splits.train.paths[2] == "sub/c.ppm");

    auto again = scan_dataset(root, "toy", SplitRule{1.0, 7});
    CHECK(again.train.paths == splits.train.paths);
}

TEST_CASE("fractional split: 10 images, 0.8 -> 8/2, stable across runs") {
    const auto root = fresh_dir("split");
    for (int i = 0; i < 10; ++i)
        write_tiny_ppm(root / ("img" + std::to_string(i) + ".ppm"), std::uint8_t(i));

    auto one = scan_dataset(root, "toy", SplitRule{0.8, 5});
    CHECK(one.train.size() == 8);
    CHECK(one.test.size() == 2);

    auto two = scan_dataset(root, "toy", SplitRule{0.8, 5});
    CHECK(one.train.paths == two.train.paths);
    CHECK(one.test.paths == two.test.paths);

    // different seed, different assignment (with overwhelming probability)
    auto other = scan_dataset(root, "toy", SplitRule{0.8, 6});
    CHECK(other.train.size() == 8);
    CHECK(one.train.paths != other.train.paths);

    // splits partition the set
    std::vector<std::string> all = one.train.paths;
    all.insert(all.end(), one.test.paths.begin(), one.test.paths.end());
    std::sort(all.begin(), all.end());
    CHECK(all.size() == 10);
    CHECK(std::unique(all.begin(), all.end()) == all.end());
}

TEST_CASE("official split files are honored when present") {
    const auto root = fresh_dir("official");
    write_tiny_ppm(root / "x.ppm", 1);
    write_tiny_ppm(root / "y.ppm", 2);
    write_tiny_ppm(root / "z.ppm", 3);
    {
        std::ofstream train_list(root / "train.txt");
        train_list << "z.ppm\nx.ppm\n";
        std::ofstream test_list(root / "test.txt");
        test_list << "y.ppm\n";
    }

    auto splits = scan_dataset(root, "official", SplitRule{0.5, 1});
    REQUIRE(splits.train.size() == 2);
    CHECK(splits.train.paths[0] == "x.ppm"); // sorted, not file order
    CHECK(splits.train.paths[1] == "z.ppm");
    REQUIRE(splits.test.size() == 1);
    CHECK(splits.test.paths[0] == "y.ppm");
}

TEST_CASE("empty directory is an error") {
    const auto root = fresh_dir("empty");
    CHECK_THROWS_AS(scan_dataset(root, "none", SplitRule{}), ValueError);
    CHECK_THROWS_AS(scan_dataset(root / "missing", "none", SplitRule{}), IoError);
}

TEST_CASE("manifest save/load round trip") {
    const auto root = fresh_dir("manifest");
    write_tiny_ppm(root / "p.ppm", 1);
    write_tiny_ppm(root / "q.ppm", 2);
    auto splits = scan_dataset(root, "toy", SplitRule{1.0, 0});

    const auto path = root / "manifest.tsv";
    save_manifest(splits.train, path);
    auto loaded = load_manifest(path, root);
    CHECK(loaded.paths == splits.train.paths);

    // ids must be contiguous and numeric
    {
        std::ofstream broken(path);
        broken << "0\tp.ppm\n2\tq.ppm\n";
    }
    CHECK_THROWS_AS(load_manifest(path, root), FormatError);
    {
        std::ofstream broken(path);
        broken << "zero\tp.ppm\n";
    }
    CHECK_THROWS_AS(load_manifest(path, root), FormatError);
}
