#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>

#include "doctest.h"
#include "originet/active_imaging.hpp"
#include "originet/augment.hpp"
#include "originet/dataset.hpp"
#include "originet/error.hpp"
#include "originet/random.hpp"

using namespace originet;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("originet_data_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

Image smooth_image(std::size_t n) {
  Image img(1, n, n);
  const double c = (static_cast<double>(n) - 1.0) / 2.0;
  for (std::size_t y = 0; y < n; ++y)
    for (std::size_t x = 0; x < n; ++x) {
      const double dy = static_cast<double>(y) - c, dx = static_cast<double>(x) - c;
      img.at(0, y, x) = 200.0 * std::exp(-(dx * dx + dy * dy) / (2.0 * 36.0));
    }
  return img;
}

double image_l2(const Image& a, const Image& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.pixels.size(); ++i) s += std::pow(a.pixels[i] - b.pixels[i], 2);
  return std::sqrt(s);
}

std::string write_frames(const fs::path& root, const std::string& rel) {
  fs::create_directories(root / rel);
  for (int t = 0; t < 3; ++t) {
    std::ofstream f(root / rel / ("f" + std::to_string(t) + ".pgm"));
    f << "P2\n2 2\n255\n" << t << " 0 0 " << 10 * t << "\n";
  }
  return rel;
}

}  // namespace

TEST_SUITE("histogram equalization") {
  TEST_CASE("two-level image") {
    Image img(1, 4, 4, 50.0);
    for (std::size_t i = 0; i < 4; ++i) img.pixels[i] = 200.0;
    const Image eq = histogram_equalization(img);
    for (std::size_t i = 0; i < 16; ++i) CHECK(eq.pixels[i] == (i < 4 ? 255.0 : 191.0));
  }

  TEST_CASE("constant image stays constant") {
    const Image eq = histogram_equalization(Image(1, 5, 5, 77.0));
    for (double p : eq.pixels) CHECK(p == eq.pixels[0]);
  }

  TEST_CASE("uniform histogram is nearly the identity") {
    Image img(1, 16, 16);
    for (std::size_t i = 0; i < 256; ++i) img.pixels[i] = static_cast<double>(i);
    const Image eq = histogram_equalization(img);
    for (std::size_t i = 0; i < 256; ++i) CHECK(std::abs(eq.pixels[i] - img.pixels[i]) <= 1.0);
  }

  TEST_CASE("continuous-toned input gives a near-linear CDF") {
    Rng rng(3);
    Image img(1, 64, 64);
    for (double& p : img.pixels) p = std::round(255.0 * std::pow(rng.uniform(), 2.0));
    const Image eq = histogram_equalization(img);
    std::vector<double> counts(256, 0.0);
    for (double p : eq.pixels) counts[static_cast<std::size_t>(p)] += 1.0;
    double running = 0.0;
    for (std::size_t v = 0; v < 256; ++v) {
      running += counts[v];
      if (counts[v] > 0) CHECK(std::abs(running / 4096.0 - static_cast<double>(v) / 255.0) <= 1.0 / 256.0);
    }
    for (double p : eq.pixels) {
      CHECK(p >= 0.0);
      CHECK(p <= 255.0);
    }
  }

  TEST_CASE("multi-channel rejected") {
    CHECK_THROWS_AS(histogram_equalization(Image(3, 2, 2)), ArgumentError);
  }
}

TEST_SUITE("rotation") {
  TEST_CASE("zero angle is the identity; center is fixed") {
    const Image img = smooth_image(33);
    CHECK(rotate(img, 0.0) == img);
    for (double a : {-45.0, -30.0, 15.0, 45.0}) CHECK(rotate(img, a).at(0, 16, 16) == doctest::Approx(img.at(0, 16, 16)));
  }

  TEST_CASE("round trip on a smooth image") {
    const Image img = smooth_image(40);
    const Image back = rotate(rotate(img, 15.0), -15.0);
    double err = 0.0;
    for (std::size_t i = 0; i < img.pixels.size(); ++i) err += std::abs(back.pixels[i] - img.pixels[i]);
    CHECK(err / static_cast<double>(img.pixels.size()) < 2.0);
  }

  TEST_CASE("direction is counter-clockwise as displayed") {
    Image img(1, 21, 21);
    img.at(0, 10, 18) = 100.0;  // right of center
    const Image r = rotate(img, 45.0);
    // Counter-clockwise on screen moves a right-hand point up and right.
    double up_right = 0.0, down_right = 0.0;
    for (std::size_t y = 0; y < 10; ++y)
      for (std::size_t x = 11; x < 21; ++x) up_right += r.at(0, y, x);
    for (std::size_t y = 11; y < 21; ++y)
      for (std::size_t x = 11; x < 21; ++x) down_right += r.at(0, y, x);
    CHECK(up_right > 0.0);
    CHECK(down_right == 0.0);
  }

  TEST_CASE("dims preserved, corners zero-filled, angle limits") {
    Image img(1, 12, 18, 9.0);
    const Image r = rotate(img, 30.0);
    CHECK(r.same_geometry(img));
    CHECK(r.at(0, 0, 0) == 0.0);
    CHECK_THROWS_AS(rotate(img, 46.0), ArgumentError);
    CHECK_THROWS_AS(rotate(img, -60.0), ArgumentError);
  }
}

TEST_SUITE("augmentation") {
  TEST_CASE("fourteen tagged samples, raw angle-0 copy unchanged") {
    Sample s;
    s.image = tensor_from_image([] {
      Image img = smooth_image(16);
      for (double& p : img.pixels) p /= 255.0;
      return img;
    }());
    s.label = 2;
    s.subject_id = "sub07";
    s.video_id = "v3";
    const auto out = augment(s);
    REQUIRE(out.size() == 14);
    std::set<std::pair<double, bool>> tags;
    for (const Sample& a : out) {
      CHECK(a.label == 2);
      CHECK(a.subject_id == "sub07");
      CHECK(a.video_id == "v3");
      CHECK(a.image.shape() == s.image.shape());
      for (double p : a.image.data()) {
        CHECK(p >= 0.0);
        CHECK(p <= 1.0);
      }
      tags.insert({a.tag.angle, a.tag.equalized});
    }
    CHECK(tags.size() == 14);
    const auto zero_raw = std::find_if(out.begin(), out.end(), [](const Sample& a) {
      return a.tag.angle == 0.0 && !a.tag.equalized;
    });
    REQUIRE(zero_raw != out.end());
    CHECK(zero_raw->image == s.image);

    const auto single = augment(s, AugmentMode::Single);
    CHECK(single.size() == 7);
    for (const Sample& a : single) CHECK(a.tag.equalized);
    CHECK(augment(s, AugmentMode::None).size() == 1);
  }
}

TEST_SUITE("manifest") {
  TEST_CASE("load, label names, resolution") {
    const fs::path dir = scratch_dir("manifest");
    write_frames(dir, "a/v1");
    write_frames(dir, "b/v1");
    write_frames(dir, "c/v2");
    std::ofstream(dir / "m.csv") << "subject_id,video_id,path,label\n"
                                 << "a,v1,a/v1,surprise\nb,v1,b/v1,happiness\nc,v2,c/v2,surprise\n";
    const DatasetManifest m = load_manifest(dir / "m.csv");
    CHECK(m.entries.size() == 3);
    CHECK(m.label_names == std::vector<std::string>{"happiness", "surprise"});
    CHECK(m.entries[0].label == 1);
    CHECK(m.subjects() == std::vector<std::string>{"a", "b", "c"});
    CHECK(load_sequence(m, m.entries[2]).tau() == 3);

    write_manifest(m, dir / "copy.csv");
    const DatasetManifest again = load_manifest(dir / "copy.csv");
    CHECK(again.entries.size() == 3);
    CHECK(again.label_names == m.label_names);
    for (std::size_t i = 0; i < 3; ++i) CHECK(again.resolve(again.entries[i]) == m.resolve(m.entries[i]));
  }

  TEST_CASE("errors carry row numbers") {
    const fs::path dir = scratch_dir("manifest_bad");
    write_frames(dir, "a/v1");
    std::ofstream(dir / "empty.csv") << "subject_id,video_id,path,label\n";
    CHECK_THROWS_AS(load_manifest(dir / "empty.csv"), FormatError);
    CHECK_THROWS_AS(load_manifest(dir / "missing.csv"), IoError);
    std::ofstream(dir / "dangling.csv") << "subject_id,video_id,path,label\na,v1,a/v1,0\nb,v1,b/nope,1\n";
    try {
      load_manifest(dir / "dangling.csv");
      FAIL("expected an error");
    } catch (const Error& e) {
      CHECK(std::string(e.what()).find("row 3") != std::string::npos);
    }
    std::ofstream(dir / "short.csv") << "subject_id,video_id,path,label\na,v1,a/v1\n";
    CHECK_THROWS_AS(load_manifest(dir / "short.csv"), FormatError);
    std::ofstream(dir / "dup.csv") << "subject_id,video_id,path,label\na,v1,a/v1,0\na,v1,a/v1,1\n";
    CHECK_THROWS(load_manifest(dir / "dup.csv"));

    std::ofstream(dir / "one.csv") << "subject_id,video_id,path,label\na,v1,a/v1,0\n";
    const DatasetManifest one = load_manifest(dir / "one.csv");
    CHECK(one.entries.size() == 1);
    CHECK_THROWS_AS(loso_splits(one), ProtocolError);
  }
}

TEST_SUITE("splits") {
  DatasetManifest fake_manifest(std::size_t subjects, std::size_t videos) {
    DatasetManifest m;
    m.label_names = {"a", "b", "c", "d"};
    for (std::size_t s = 0; s < subjects; ++s)
      for (std::size_t v = 0; v < videos; ++v)
        m.entries.push_back({"s" + std::to_string(s), "v" + std::to_string(v), "x", (s + v) % 4});
    return m;
  }

  TEST_CASE("loso partitions entries by subject") {
    for (std::size_t subjects : {2u, 5u, 19u}) {
      const DatasetManifest m = fake_manifest(subjects, 3);
      const auto folds = loso_splits(m);
      CHECK(folds.size() == subjects);
      std::multiset<std::string> tested;
      for (const LosoFold& f : folds) {
        CHECK(f.train.size() + f.test.size() == m.entries.size());
        for (const auto& e : f.train) CHECK(e.subject_id != f.test_subject);
        for (const auto& e : f.test) {
          CHECK(e.subject_id == f.test_subject);
          tested.insert(e.subject_id + "/" + e.video_id);
        }
      }
      CHECK(tested.size() == m.entries.size());
      CHECK(std::set<std::string>(tested.begin(), tested.end()).size() == m.entries.size());
    }
  }

  TEST_CASE("train/validation sizes and determinism") {
    const auto ten = fake_manifest(2, 5).entries;
    const auto [tr, va] = train_val_split(ten, 0.8, 4);
    CHECK(tr.size() == 8);
    CHECK(va.size() == 2);
    const auto [tr5, va5] = train_val_split(std::vector<ManifestEntry>(ten.begin(), ten.begin() + 5), 0.8, 4);
    CHECK(tr5.size() == 4);
    CHECK(va5.size() == 1);
    const auto [tr2, va2] = train_val_split(ten, 0.8, 4);
    CHECK(tr2 == tr);
    CHECK(va2 == va);
  }

  TEST_CASE("label shuffle keeps class balance") {
    const DatasetManifest m = fake_manifest(4, 4);
    const DatasetManifest s = shuffle_labels(m, 11);
    std::vector<std::size_t> a, b;
    bool moved = false;
    for (std::size_t i = 0; i < m.entries.size(); ++i) {
      a.push_back(m.entries[i].label);
      b.push_back(s.entries[i].label);
      moved = moved || a.back() != b.back();
    }
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    CHECK(a == b);
    CHECK(moved);
  }
}

TEST_SUITE("synthetic data") {
  TEST_CASE("deterministic, static background, separable classes") {
    SynthSpec spec;
    spec.num_subjects = 3;
    spec.videos_per_subject = 4;
    const auto a = synth_videos(spec), b = synth_videos(spec);
    REQUIRE(a.size() == 12);
    for (std::size_t i = 0; i < a.size(); ++i) {
      CHECK(a[i].entry == b[i].entry);
      CHECK(a[i].frames == b[i].frames);
      CHECK(a[i].entry.label == (i / 4 + i % 4) % 4);
    }

    // Pixels untouched by the moving blob are identical across frames, and
    // some pixels do change.
    const auto& frames = a[0].frames;
    std::size_t changed = 0, fixed = 0;
    for (std::size_t p = 0; p < frames[0].pixels.size(); ++p) {
      bool same = true;
      for (const Image& f : frames) same = same && f.pixels[p] == frames[0].pixels[p];
      (same ? fixed : changed) += 1;
    }
    CHECK(changed > 0);
    CHECK(fixed > changed);

    std::vector<Image> mean(4, Image(1, spec.size, spec.size));
    for (const SynthVideo& v : a) {
      FrameSequence seq;
      seq.frames = v.frames;
      const Image act = active_image(seq).pixels;
      for (std::size_t i = 0; i < act.pixels.size(); ++i) mean[v.entry.label].pixels[i] += act.pixels[i];
    }
    CHECK(image_l2(mean[0], mean[1]) > 0.0);

    SynthSpec bad = spec;
    bad.frames = 1;
    CHECK_THROWS_AS(synth_videos(bad), ArgumentError);
    bad = spec;
    bad.size = 0;
    CHECK_THROWS_AS(synth_videos(bad), ArgumentError);
  }

  TEST_CASE("written dataset loads through the manifest and materializes") {
    SynthSpec spec;
    spec.num_subjects = 2;
    spec.videos_per_subject = 2;
    spec.frames = 4;
    spec.size = 16;
    const fs::path dir = scratch_dir("synth");
    const DatasetManifest m = synth_dataset(spec, dir);
    const DatasetManifest loaded = load_manifest(dir / "manifest.csv");
    CHECK(loaded.entries.size() == 4);
    const auto videos = synth_videos(spec);
    for (std::size_t i = 0; i < 4; ++i) CHECK(load_sequence(loaded, loaded.entries[i]).frames == videos[i].frames);

    ModelConfig model;
    model.input_size = 16;
    model.block_depths = {4, 8};
    const auto samples = materialize(loaded, loaded.entries, model, {});
    REQUIRE(samples.size() == 4);
    for (const Sample& s : samples) {
      CHECK(s.image.shape() == Shape{1, 16, 16});
      const auto [lo, hi] = std::minmax_element(s.image.data().begin(), s.image.data().end());
      CHECK(*lo == 0.0);
      CHECK(*hi == 1.0);
    }
    CHECK(m.entries.size() == loaded.entries.size());
  }
}
