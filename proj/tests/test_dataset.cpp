// Copyright (c) 2026 bankread contributors
// SPDX-License-Identifier: Apache-2.0

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <map>

#include "bankread/dataset.hpp"
#include "bankread/dataset_io.hpp"
#include "bankread/glyph.hpp"
#include "bankread/idx.hpp"

using namespace bankread;
namespace fs = std::filesystem;

namespace {

GrayImage tiny_noise_image(int w, int h, std::uint64_t seed) {
    GrayImage img(w, h);
    SplitMix64 rng(seed);
    for (auto& p : img.pixels) p = static_cast<float>(rng.next_unit());
    return img;
}

// A canon-shaped dataset with arbitrary tiny images, for replication and
// serialization tests that do not care about rendering.
Dataset fake_canon(int classes, int w, int h) {
    Dataset ds;
    ds.grid = make_angle_grid(90, 180.0 / (classes - 1));
    ds.samples.resize(static_cast<std::size_t>(classes));
    for (int i = 0; i < classes; ++i) {
        ds.samples[static_cast<std::size_t>(i)].image = tiny_noise_image(w, h, 100 + i);
        ds.samples[static_cast<std::size_t>(i)].label = i;
        ds.samples[static_cast<std::size_t>(i)].angle_deg = ds.grid.angles[static_cast<std::size_t>(i)];
    }
    return ds;
}

void write_idx_pair(const fs::path& images, const fs::path& labels, int n, int rows, int cols,
                    std::uint32_t img_magic = 0x803, std::uint32_t lab_magic = 0x801,
                    int bad_label_at = -1) {
    auto be32 = [](std::ofstream& out, std::uint32_t v) {
        unsigned char b[4] = {static_cast<unsigned char>(v >> 24),
                              static_cast<unsigned char>(v >> 16),
                              static_cast<unsigned char>(v >> 8), static_cast<unsigned char>(v)};
        out.write(reinterpret_cast<char*>(b), 4);
    };
    std::ofstream imgs(images, std::ios::binary);
    be32(imgs, img_magic);
    be32(imgs, static_cast<std::uint32_t>(n));
    be32(imgs, static_cast<std::uint32_t>(rows));
    be32(imgs, static_cast<std::uint32_t>(cols));
    for (int k = 0; k < n * rows * cols; ++k) {
        const unsigned char byte = static_cast<unsigned char>(k % 251);
        imgs.write(reinterpret_cast<const char*>(&byte), 1);
    }
    std::ofstream labs(labels, std::ios::binary);
    be32(labs, lab_magic);
    be32(labs, static_cast<std::uint32_t>(n));
    for (int k = 0; k < n; ++k) {
        const unsigned char byte = (k == bad_label_at) ? 11 : static_cast<unsigned char>(k % 10);
        labs.write(reinterpret_cast<const char*>(&byte), 1);
    }
}

} // namespace

TEST_CASE("angle grid: paper grid is 61 entries from -90 to +90") {
    const AngleGrid grid = make_angle_grid(90, 3);
    CHECK(grid.num_classes() == 61);
    CHECK(grid.angles.front() == -90.0);
    CHECK(grid.angles.back() == 90.0);
    bool has_zero = false;
    for (std::size_t i = 1; i < grid.angles.size(); ++i) {
        CHECK(grid.angles[i] > grid.angles[i - 1]);
        if (grid.angles[i] == 0.0) has_zero = true;
    }
    CHECK(has_zero);

    CHECK(make_angle_grid(90, 1).num_classes() == 181);
    const AngleGrid small = make_angle_grid(3, 3);
    CHECK(small.angles == std::vector<double>{-3.0, 0.0, 3.0});

    CHECK_THROWS_AS(make_angle_grid(90, 7), InvalidArgument);
    CHECK_THROWS_AS(make_angle_grid(-90, 3), InvalidArgument);
}

TEST_CASE("label_of_angle: affine encoding confirmed at -12 -> 26") {
    const AngleGrid grid = make_angle_grid(90, 3);
    CHECK(label_of_angle(grid, -12) == 26);
    CHECK(label_of_angle(grid, -90) == 0);
    CHECK(label_of_angle(grid, 0) == 30);
    CHECK_THROWS_AS(label_of_angle(grid, -12.5), InvalidArgument);
}

TEST_CASE("angle_of_label: inverse of label_of_angle on every grid point") {
    const AngleGrid grid = make_angle_grid(90, 3);
    CHECK(angle_of_label(grid, 26) == -12.0);
    CHECK(angle_of_label(grid, 0) == -90.0);
    for (int label = 0; label < grid.num_classes(); ++label)
        CHECK(label_of_angle(grid, angle_of_label(grid, label)) == label);
    CHECK_THROWS_AS(angle_of_label(grid, 61), InvalidArgument);
    CHECK_THROWS_AS(angle_of_label(grid, -1), InvalidArgument);
}

TEST_CASE("canon: one sample per angle in grid order") {
    const GrayImage glyph = make_default_glyph(32, 32);
    const AngleGrid grid = make_angle_grid(90, 3);
    const Dataset canon = generate_canon(glyph, grid);
    REQUIRE(canon.count() == 61);
    for (int i = 0; i < 61; ++i) {
        CHECK(canon.samples[static_cast<std::size_t>(i)].label == i);
        CHECK(canon.samples[static_cast<std::size_t>(i)].angle_deg ==
              grid.angles[static_cast<std::size_t>(i)]);
        CHECK(angle_of_label(grid, canon.samples[static_cast<std::size_t>(i)].label) ==
              canon.samples[static_cast<std::size_t>(i)].angle_deg);
    }
}

TEST_CASE("canon: middle sample of a 3-angle grid is the glyph itself") {
    const GrayImage glyph = make_default_glyph(32, 32);
    const Dataset canon = generate_canon(glyph, make_angle_grid(3, 3));
    REQUIRE(canon.count() == 3);
    CHECK(max_abs_diff(canon.samples[1].image, glyph) == 0.0f);
}

TEST_CASE("canon: regeneration is bit identical; aliasing glyphs rejected") {
    const GrayImage glyph = make_default_glyph(32, 32);
    const AngleGrid grid = make_angle_grid(90, 15);
    const Dataset a = generate_canon(glyph, grid);
    const Dataset b = generate_canon(glyph, grid);
    REQUIRE(a.count() == b.count());
    for (int i = 0; i < a.count(); ++i)
        CHECK(a.samples[static_cast<std::size_t>(i)].image.pixels ==
              b.samples[static_cast<std::size_t>(i)].image.pixels);

    GrayImage disk(32, 32);
    for (int y = 0; y < 32; ++y)
        for (int x = 0; x < 32; ++x)
            if ((x - 15.5) * (x - 15.5) + (y - 15.5) * (y - 15.5) <= 100.0) disk.at(x, y) = 1.0f;
    CHECK_THROWS_AS(generate_canon(disk, grid), InvalidArgument);
}

TEST_CASE("canon: mirrored negative half matches direct rendering") {
    const GrayImage glyph = make_default_glyph(32, 32);
    const AngleGrid grid = make_angle_grid(90, 15);
    CanonOptions mirrored;
    mirrored.mirror_negative = true;
    const Dataset direct = generate_canon(glyph, grid);
    const Dataset fast = generate_canon(glyph, grid, mirrored);
    for (int i = 0; i < direct.count(); ++i)
        CHECK(max_abs_diff(direct.samples[static_cast<std::size_t>(i)].image,
                           fast.samples[static_cast<std::size_t>(i)].image) < 1e-6f);

    // asymmetric glyph must be refused
    GrayImage lopsided = glyph;
    lopsided.at(2, 2) = 1.0f;
    CanonOptions opts;
    opts.mirror_negative = true;
    CHECK_THROWS_AS(generate_canon(lopsided, grid, opts), InvalidArgument);
}

TEST_CASE("replicate: counts multiply out (canon 20 x 6000 = 120000)") {
    const Dataset canon = fake_canon(20, 4, 4);
    const Dataset big = replicate(canon, 6000, std::nullopt, 1);
    CHECK(big.count() == 120000);

    const Dataset desk = replicate(fake_canon(61, 4, 4), 20, std::nullopt, 1);
    CHECK(desk.count() == 1220);
}

TEST_CASE("replicate: single clean copy is a permutation of the canon") {
    const Dataset canon = fake_canon(9, 6, 5);
    const Dataset rep = replicate(canon, 1, std::nullopt, 7);
    REQUIRE(rep.count() == canon.count());
    std::map<int, int> seen;
    bool reordered = false;
    for (int i = 0; i < rep.count(); ++i) {
        const auto& s = rep.samples[static_cast<std::size_t>(i)];
        seen[s.label]++;
        CHECK(s.image.pixels == canon.samples[static_cast<std::size_t>(s.label)].image.pixels);
        if (s.label != i) reordered = true;
    }
    for (const auto& [label, count] : seen) CHECK(count == 1);
    CHECK(seen.size() == static_cast<std::size_t>(canon.count()));
    CHECK(reordered); // seed 7 does move something
}

TEST_CASE("replicate: every class occurs exactly num_copies times") {
    const Dataset canon = fake_canon(13, 4, 4);
    const Dataset rep = replicate(canon, 17, std::nullopt, 3);
    std::map<int, int> counts;
    for (const auto& s : rep.samples) counts[s.label]++;
    CHECK(counts.size() == 13);
    for (const auto& [label, count] : counts) CHECK(count == 17);
}

TEST_CASE("replicate: deterministic, noise varies per copy") {
    const Dataset canon = fake_canon(5, 8, 8);
    const NoiseSpec noise{NoiseKind::gaussian, 0.05};
    const Dataset a = replicate(canon, 4, noise, 11);
    const Dataset b = replicate(canon, 4, noise, 11);
    REQUIRE(a.count() == b.count());
    for (int i = 0; i < a.count(); ++i) {
        CHECK(a.samples[static_cast<std::size_t>(i)].label ==
              b.samples[static_cast<std::size_t>(i)].label);
        CHECK(a.samples[static_cast<std::size_t>(i)].image.pixels ==
              b.samples[static_cast<std::size_t>(i)].image.pixels);
    }
    // two noised copies of the same canon sample differ
    const Dataset two = replicate(fake_canon(2, 8, 8), 2, noise, 11);
    std::vector<const Sample*> zeros;
    for (const auto& s : two.samples)
        if (s.label == 0) zeros.push_back(&s);
    REQUIRE(zeros.size() == 2);
    CHECK(zeros[0]->image.pixels != zeros[1]->image.pixels);

    CHECK_THROWS_AS(replicate(canon, 0, std::nullopt, 1), InvalidArgument);
}

TEST_CASE("gds1: round trip preserves labels, angles, pixels to 1/255") {
    const auto path = (fs::temp_directory_path() / "bankread_ds.gds").string();
    Dataset ds = replicate(fake_canon(7, 9, 5), 3, NoiseSpec{NoiseKind::speckle, 0.2}, 19);
    ds.samples[2].angle_deg = 33.25; // off-grid evaluation angle survives
    save_dataset(ds, path);
    const Dataset back = load_dataset(path);
    REQUIRE(back.count() == ds.count());
    CHECK(back.grid.num_classes() == ds.grid.num_classes());
    CHECK(back.image_width() == 9);
    CHECK(back.image_height() == 5);
    for (int i = 0; i < ds.count(); ++i) {
        const auto& orig = ds.samples[static_cast<std::size_t>(i)];
        const auto& got = back.samples[static_cast<std::size_t>(i)];
        CHECK(got.label == orig.label);
        CHECK(got.angle_deg == doctest::Approx(orig.angle_deg).epsilon(1e-6));
        CHECK(max_abs_diff(got.image, orig.image) <= 0.5f / 255.0f + 1e-6f);
    }
    fs::remove(path);
}

TEST_CASE("gds1: bad magic and truncation are distinct errors") {
    const auto path = (fs::temp_directory_path() / "bankread_bad.gds").string();
    {
        std::ofstream out(path, std::ios::binary);
        out << "GDSX rest does not matter";
    }
    CHECK_THROWS_AS(load_dataset(path), FormatError);

    const Dataset ds = replicate(fake_canon(4, 6, 6), 2, std::nullopt, 5);
    save_dataset(ds, path);
    const auto full_size = fs::file_size(path);
    fs::resize_file(path, full_size - 20); // cut into the last sample
    CHECK_THROWS_WITH_AS(load_dataset(path), doctest::Contains("sample 7"), TruncationError);
    fs::remove(path);
}

TEST_CASE("export: PGM files plus labels.csv") {
    const auto dir = fs::temp_directory_path() / "bankread_export";
    fs::remove_all(dir);
    const Dataset ds = replicate(fake_canon(3, 8, 8), 1, std::nullopt, 2);
    export_dataset(ds, dir.string());
    CHECK(fs::exists(dir / "labels.csv"));
    CHECK(fs::exists(dir / "sample_000000.pgm"));
    CHECK(fs::exists(dir / "sample_000002.pgm"));
    std::ifstream csv(dir / "labels.csv");
    std::string header;
    std::getline(csv, header);
    CHECK(header == "filename,label,angle");
    int rows = 0;
    for (std::string line; std::getline(csv, line);) ++rows;
    CHECK(rows == 3);
    fs::remove_all(dir);
}

TEST_CASE("idx: well-formed pair loads with placeholder grid") {
    const auto imgs = fs::temp_directory_path() / "bankread_idx_images";
    const auto labs = fs::temp_directory_path() / "bankread_idx_labels";
    write_idx_pair(imgs, labs, 3, 28, 28);
    const Dataset ds = load_idx(imgs.string(), labs.string());
    CHECK(ds.count() == 3);
    CHECK(ds.image_width() == 28);
    CHECK(ds.image_height() == 28);
    CHECK_FALSE(ds.interpolatable);
    CHECK(ds.grid.placeholder);
    CHECK(ds.grid.num_classes() == 10);
    CHECK(ds.samples[1].label == 1);
    CHECK(ds.samples[0].image.pixels[1] == doctest::Approx(1.0 / 255.0));
    fs::remove(imgs);
    fs::remove(labs);
}

TEST_CASE("idx: bad magic, count mismatch, invalid label") {
    const auto imgs = fs::temp_directory_path() / "bankread_idx_i2";
    const auto labs = fs::temp_directory_path() / "bankread_idx_l2";

    write_idx_pair(imgs, labs, 2, 4, 4, 0x801, 0x801); // label magic in image file
    CHECK_THROWS_AS(load_idx(imgs.string(), labs.string()), FormatError);

    write_idx_pair(imgs, labs, 2, 4, 4);
    {
        // rewrite label count field to 3
        std::fstream f(labs, std::ios::binary | std::ios::in | std::ios::out);
        f.seekp(4);
        const unsigned char be[4] = {0, 0, 0, 3};
        f.write(reinterpret_cast<const char*>(be), 4);
    }
    CHECK_THROWS_AS(load_idx(imgs.string(), labs.string()), FormatError);

    write_idx_pair(imgs, labs, 3, 4, 4, 0x803, 0x801, 1);
    CHECK_THROWS_WITH_AS(load_idx(imgs.string(), labs.string()),
                         doctest::Contains("invalid label 11"), FormatError);
    fs::remove(imgs);
    fs::remove(labs);
}
