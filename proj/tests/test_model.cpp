#include <doctest.h>

#include "ssrgan/gradcheck.hpp"
#include "ssrgan/losses.hpp"
#include "ssrgan/model.hpp"

using namespace ssrgan;

namespace {

// closed-form per-layer parameter tally, written from the architecture
// description only (never from the live network)
std::size_t generator_tally(const GeneratorConfig& c) {
    const std::size_t F = c.width, C = c.channels;
    const std::size_t bn = c.use_bn ? 2 * F : 0;
    std::size_t total = 0;
    total += F * C * 81 + F + 1;                          // head conv k9 + prelu
    total += c.res_blocks * (2 * (F * F * 9 + F + bn) + 1); // res: conv+bn, prelu, conv+bn
    total += F * F * 9 + F + bn;                          // trunk exit conv + bn
    total += c.shuffle_stages * (4 * F * F * 9 + 4 * F + 1); // up conv + prelu
    total += C * F * 81 + C;                              // tail conv k9
    return total;
}

std::size_t discriminator_tally(const DiscriminatorConfig& c) {
    std::size_t total = 0, prev = c.in_channels;
    for (std::size_t i = 0; i < c.block_channels.size(); ++i) {
        const std::size_t ch = c.block_channels[i];
        total += ch * prev * 9 + ch;
        if (c.use_bn && i > 0) total += 2 * ch;
        prev = ch;
    }
    total += prev * 1 * c.head_kernel * c.head_kernel + 1;
    return total;
}

} // namespace

TEST_CASE("generator is shape-preserving at 128x128 and 32x32") {
    Rng rng(1);
    GeneratorConfig cfg; // defaults: C=3, F=64, 6 blocks, 2 shuffle stages
    Generator<float> gen(cfg, rng);

    Rng data_rng(2);
    auto x128 = Tensor<float>::uniform({1, 3, 128, 128}, -1.0f, 1.0f, data_rng);
    auto y128 = forward_tensor(gen, x128, Mode::eval);
    CHECK(y128.shape() == Shape{1, 3, 128, 128});

    auto x32 = Tensor<float>::uniform({1, 3, 32, 32}, -1.0f, 1.0f, data_rng);
    auto y32 = forward_tensor(gen, x32, Mode::eval);
    CHECK(y32.shape() == Shape{1, 3, 32, 32});

    // tanh output range
    for (std::size_t i = 0; i < y32.size(); ++i) {
        CHECK(y32[i] >= -1.0f);
        CHECK(y32[i] <= 1.0f);
    }
}

TEST_CASE("generator rejects extents not divisible by the tail stride") {
    Rng rng(3);
    GeneratorConfig cfg;
    cfg.width = 8;
    cfg.res_blocks = 1;
    Generator<float> gen(cfg, rng);
    auto bad = Tensor<float>::zeros({1, 3, 30, 30});
    CHECK_THROWS_AS(forward_tensor(gen, bad, Mode::eval), ShapeError);
    auto tiny = Tensor<float>::zeros({1, 3, 4, 4});
    CHECK_THROWS_AS(forward_tensor(gen, tiny, Mode::eval), ShapeError);
}

TEST_CASE("generator shape-preserving across the H,W grid") {
    Rng rng(5);
    GeneratorConfig cfg;
    cfg.width = 4;
    cfg.res_blocks = 1;
    Generator<float> gen(cfg, rng);
    Rng data_rng(6);
    for (std::size_t h : {8u, 12u, 16u, 36u}) {
        for (std::size_t w : {8u, 20u}) {
            auto x = Tensor<float>::uniform({1, 3, h, w}, -1.0f, 1.0f, data_rng);
            CHECK(forward_tensor(gen, x, Mode::eval).shape() == Shape{1, 3, h, w});
        }
    }
}

TEST_CASE("one-stage reading: shuffle_stages=1 with a stride-2 tail still preserves shape") {
    Rng rng(55);
    GeneratorConfig cfg;
    cfg.width = 8;
    cfg.res_blocks = 1;
    cfg.shuffle_stages = 1;
    REQUIRE(cfg.tail_stride() == 2);
    Generator<float> gen(cfg, rng);
    Rng data_rng(56);
    auto x = Tensor<float>::uniform({1, 3, 16, 16}, -1.0f, 1.0f, data_rng);
    CHECK(forward_tensor(gen, x, Mode::eval).shape() == Shape{1, 3, 16, 16});
}

TEST_CASE("discriminator maps (N,3,H,W) to (N,1,H,W) scores in (0,1)") {
    Rng rng(7);
    DiscriminatorConfig cfg; // defaults: 64..512, strides 2,2,1,1, k4/s4 head
    Discriminator<float> disc(cfg, rng);

    Rng data_rng(8);
    auto x = Tensor<float>::uniform({1, 3, 32, 32}, -1.0f, 1.0f, data_rng);
    auto y = forward_tensor(disc, x, Mode::eval);
    REQUIRE(y.shape() == Shape{1, 1, 32, 32});
    for (std::size_t i = 0; i < y.size(); ++i) {
        CHECK(y[i] > 0.0f);
        CHECK(y[i] < 1.0f);
    }

    auto x128 = Tensor<float>::uniform({1, 3, 128, 128}, -1.0f, 1.0f, data_rng);
    CHECK(forward_tensor(disc, x128, Mode::eval).shape() == Shape{1, 1, 128, 128});
}

TEST_CASE("eval-mode forwards are bit-identical") {
    Rng rng(9);
    GeneratorConfig cfg;
    cfg.width = 8;
    cfg.res_blocks = 2;
    Generator<float> gen(cfg, rng);
    Rng data_rng(10);
    auto x = Tensor<float>::uniform({2, 3, 16, 16}, -1.0f, 1.0f, data_rng);
    auto a = forward_tensor(gen, x, Mode::eval);
    auto b = forward_tensor(gen, x, Mode::eval);
    for (std::size_t i = 0; i < a.size(); ++i) REQUIRE(a[i] == b[i]);
}

TEST_CASE("identical seeds build identical networks") {
    GeneratorConfig cfg;
    cfg.width = 8;
    cfg.res_blocks = 1;
    Rng r1(77), r2(77);
    Generator<float> g1(cfg, r1), g2(cfg, r2);
    auto p1 = g1.parameters(), p2 = g2.parameters();
    REQUIRE(p1.size() == p2.size());
    for (std::size_t i = 0; i < p1.size(); ++i) {
        REQUIRE(p1[i]->name == p2[i]->name);
        REQUIRE(p1[i]->value.size() == p2[i]->value.size());
        for (std::size_t j = 0; j < p1[i]->value.size(); ++j)
            REQUIRE(p1[i]->value[j] == p2[i]->value[j]);
    }
}

TEST_CASE("parameter counts match the closed-form tally") {
    Rng rng(11);
    GeneratorConfig gcfg;
    Generator<float> gen(gcfg, rng);
    CHECK(parameter_count(gen.parameters()) == generator_tally(gcfg));
    CHECK(generator_tally(gcfg) == 808332u); // default G, recorded in the README

    DiscriminatorConfig dcfg;
    Discriminator<float> disc(dcfg, rng);
    CHECK(parameter_count(disc.parameters()) == discriminator_tally(dcfg));
    CHECK(discriminator_tally(dcfg) == 1560961u);

    // a non-default config to keep the formula honest
    GeneratorConfig small;
    small.width = 4;
    small.res_blocks = 1;
    small.use_bn = false;
    Generator<float> gs(small, rng);
    CHECK(parameter_count(gs.parameters()) == generator_tally(small));
}

TEST_CASE("config validation") {
    GeneratorConfig bad;
    bad.res_blocks = 0;
    CHECK_THROWS_AS(bad.validate(), ConfigError);

    DiscriminatorConfig dbad;
    dbad.block_strides = {2, 2, 2, 1}; // x8 downsample, head only undoes x4
    CHECK_THROWS_AS(dbad.validate(), ConfigError);

    DiscriminatorConfig dbad2;
    dbad2.block_channels = {64, 128};
    CHECK_THROWS_AS(dbad2.validate(), ConfigError);
}

TEST_CASE("end-to-end gradients of the tiny GAN match finite differences") {
    Rng rng(13);
    GeneratorConfig gcfg;
    gcfg.width = 4;
    gcfg.res_blocks = 1;
    Generator<double> gen(gcfg, rng);

    DiscriminatorConfig dcfg;
    dcfg.block_channels = {4, 8};
    dcfg.block_strides = {2, 2};
    Discriminator<double> disc(dcfg, rng);

    Rng data_rng(14);
    auto corrupted = make_constant(Tensor<double>::uniform({1, 3, 8, 8}, -1.0, 1.0, data_rng));
    auto clean = Tensor<double>::uniform({1, 3, 8, 8}, -1.0, 1.0, data_rng);

    SUBCASE("generator loss vs all G and D parameters") {
        std::vector<NodePtr<double>> leaves = gen.parameters();
        auto d_params = disc.parameters();
        leaves.insert(leaves.end(), d_params.begin(), d_params.end());
        auto build = [&] {
            auto h_hat = gen.forward(corrupted, Mode::train);
            auto d_fake = disc.forward(h_hat, Mode::train);
            return generator_loss(h_hat, clean, d_fake).total;
        };
        auto res = check_gradients<double>(build, leaves);
        CHECK(res.max_rel_error < 1e-5);
    }

    SUBCASE("discriminator loss vs D parameters, fake detached") {
        auto h_hat_value = gen.forward(corrupted, Mode::train)->value;
        Rng alpha_rng(15);
        auto targets = real_targets_batch<double>(1, 8, 8, alpha_rng);
        auto build = [&] {
            auto d_real = disc.forward(make_constant(clean), Mode::train);
            auto d_fake = disc.forward(make_constant(h_hat_value), Mode::train);
            return discriminator_loss(d_real, d_fake, targets).total;
        };
        auto res = check_gradients<double>(build, disc.parameters());
        CHECK(res.max_rel_error < 1e-5);
    }
}
