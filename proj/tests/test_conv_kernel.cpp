#include "doctest.h"

#include <cmath>

#include "infinet/conv_kernel.hpp"
#include "infinet/dataset.hpp"
#include "infinet/gram.hpp"
#include "infinet/parallel.hpp"

using namespace infinet;

TEST_CASE("extract_patches: flat and image schemes") {
    Vec x(4);
    x << 1.0, 2.0, 3.0, 4.0;
    auto scheme = PatchScheme::flat(4, 2, 2);
    auto patches = extract_patches(x, scheme);
    REQUIRE(patches.size() == 2);
    CHECK(patches[0][0] == 1.0);
    CHECK(patches[0][1] == 2.0);
    CHECK(patches[1][0] == 3.0);
    CHECK(patches[1][1] == 4.0);

    // degenerate scheme: the single patch is the whole input
    auto whole = PatchScheme::flat(4, 4, 1);
    auto one = extract_patches(x, whole);
    REQUIRE(one.size() == 1);
    CHECK((one[0] - x).norm() == 0.0);

    // 3x3 image, 2x2 patches, stride 1 -> 4 patches in row-major order
    Vec img(9);
    img << 1, 2, 3, 4, 5, 6, 7, 8, 9;
    auto img_scheme = PatchScheme::image(3, 3, 2, 1);
    CHECK(img_scheme.patch_count() == 4);
    auto img_patches = extract_patches(img, img_scheme);
    REQUIRE(img_patches.size() == 4);
    Vec expected_first(4), expected_last(4);
    expected_first << 1, 2, 4, 5;
    expected_last << 5, 6, 8, 9;
    CHECK((img_patches[0] - expected_first).norm() == 0.0);
    CHECK((img_patches[3] - expected_last).norm() == 0.0);

    CHECK_THROWS_AS(extract_patches(x, img_scheme), DataError);
    CHECK_THROWS_AS(PatchScheme::flat(4, 5, 1), ConfigError);
    CHECK_THROWS_AS(PatchScheme::flat(4, 2, 0), ConfigError);
}

TEST_CASE("conv kernel reduces to the flat kernel for a whole-input patch") {
    Rng rng(3);
    Vec a(6), b(6);
    rng.fill_normal(a);
    rng.fill_normal(b);
    auto scheme = PatchScheme::flat(6, 6, 1);
    for (Activation act : {Activation::ReLU, Activation::Step}) {
        CHECK(conv_single_layer_kernel(a, b, scheme, act) == single_layer_kernel(a, b, act));
    }
}

TEST_CASE("conv kernel diagonal with unit-norm patches") {
    // 2x2 patches of a 4x4 image, stride 2: P = 4 disjoint patches
    Vec img = Vec::Zero(16);
    // one distinct unit-norm entry in each patch
    img[0] = 1.0;   // patch (0,0)
    img[2] = 1.0;   // patch (0,1)
    img[8] = 1.0;   // patch (1,0)
    img[10] = 1.0;  // patch (1,1)
    auto scheme = PatchScheme::image(4, 4, 2, 2);
    CHECK(scheme.patch_count() == 4);
    CHECK(conv_single_layer_kernel(img, img, scheme, Activation::Step) ==
          doctest::Approx(4.0 * 0.5).epsilon(1e-12));
    auto mean_scheme = PatchScheme::image(4, 4, 2, 2, PatchScheme::Aggregation::Mean);
    CHECK(conv_single_layer_kernel(img, img, mean_scheme, Activation::Step) ==
          doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("conv kernel equals the patchwise MC oracle") {
    Rng rng(5);
    Vec a(9), b(9);
    rng.fill_normal(a);
    rng.fill_normal(b);
    auto scheme = PatchScheme::image(3, 3, 2, 1);
    const double analytic = conv_single_layer_kernel(a, b, scheme, Activation::ReLU);

    // oracle: E_w[ sum_p f(<w, a_p>) f(<w, b_p>) ] over the shared measure
    auto pa = extract_patches(a, scheme);
    auto pb = extract_patches(b, scheme);
    auto est = mc_estimate<1>(400000, 71, kDefaultShards, [&](Rng& r, std::array<double, 1>& v) {
        Vec w(4);
        r.fill_normal(w);
        double total = 0.0;
        for (std::size_t p = 0; p < pa.size(); ++p)
            total += activation_apply(Activation::ReLU, w.dot(pa[p])) *
                     activation_apply(Activation::ReLU, w.dot(pb[p]));
        v[0] = total;
    });
    CHECK(std::abs(analytic - est.mean[0]) <= 3.0 * est.stderr_[0]);
}

TEST_CASE("zero patches under Step are skipped with a diagnostic count") {
    Vec x = Vec::Zero(4), y = Vec::Zero(4);
    x[0] = 1.0;
    y[0] = 1.0;
    y[2] = 1.0;
    auto scheme = PatchScheme::flat(4, 2, 2);
    ConvDiagnostics diag;
    const double v = conv_single_layer_kernel(x, y, scheme, Activation::Step,
                                              ScaleConvention::Canonical, &diag);
    CHECK(diag.skipped_zero_patch_pairs == 1);  // second patch of x is zero
    CHECK(v == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("translation sensitivity: shifting by one stride changes the kernel") {
    Vec x = Vec::Zero(4), shifted = Vec::Zero(4);
    x[0] = 1.0;
    shifted[1] = 1.0;
    auto scheme = PatchScheme::flat(4, 2, 2);
    const double diag = conv_single_layer_kernel(x, x, scheme, Activation::ReLU);
    const double off = conv_single_layer_kernel(x, shifted, scheme, Activation::ReLU);
    CHECK(diag != off);
    CHECK(diag > off);
}

TEST_CASE("conv Gram on random images is PSD") {
    Rng rng(7);
    Dataset data;
    data.instances.resize(40, 9);
    for (long i = 0; i < 40; ++i)
        for (long j = 0; j < 9; ++j) data.instances(i, j) = std::abs(rng.normal());
    data.labels.assign(40, 0);
    data.num_classes = 1;

    KernelSpec spec;
    spec.activation = Activation::ReLU;
    spec.patches = PatchScheme::image(3, 3, 2, 1);
    GramMatrix g = gram(data, spec);
    CHECK(min_eigenvalue(g.values) >= -1e-8 * g.values.trace());
}
