#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <fstream>

#include <Eigen/Geometry>

#include "ssc/error.hpp"
#include "ssc/io.hpp"
#include "ssc/lga.hpp"
#include "ssc/synth.hpp"
#include "support.hpp"

using ssc::FormatError;
using ssc::io::Bytes;
using ssc::io::GridDType;

namespace {

ssc::GridGeometry odd_geometry() {
  return ssc::GridGeometry{{5, 3, 4}, 0.05, {-1.25, 0.5, 2.0}};
}

Bytes reencode_grid(const Bytes& b) { return ssc::io::encode_grid(ssc::io::decode_grid(b, "mem")); }

}  // namespace

TEST_SUITE("grid files") {
  TEST_CASE("header layout") {
    const Bytes b = ssc::io::encode_grid(ssc::io::make_grid_file(ssc::LabelGrid(odd_geometry())));
    REQUIRE(b.size() == ssc::io::kGridHeaderSize + 60);
    CHECK(std::string(b.begin(), b.begin() + 4) == "VXG1");
    CHECK(b[4] == 0);
    CHECK(b[5] == 5);  // nx little-endian
    CHECK(b[6] == 0);
    CHECK(b[9] == 3);
    CHECK(b[13] == 4);
  }

  TEST_CASE("all dtypes round-trip byte-identically") {
    const auto labels = ssc::synth::random_labels(odd_geometry(), 3);
    const auto lga = ssc::compute_lga(labels);
    ssc::VoxelGrid<float> scalars(odd_geometry());
    for (std::size_t i = 0; i < scalars.size(); ++i) scalars[i] = std::sin(static_cast<float>(i)) * 0.7f;
    const auto mask = ssc::synth::random_mask(odd_geometry(), 2);

    for (const auto& file : {ssc::io::make_grid_file(labels), ssc::io::make_lga_file(lga),
                             ssc::io::make_grid_file(scalars), ssc::io::make_mask_file(mask)}) {
      const Bytes b = ssc::io::encode_grid(file);
      CHECK(reencode_grid(b) == b);
    }
    const auto labels_back =
        ssc::io::to_labels(ssc::io::decode_grid(ssc::io::encode_grid(ssc::io::make_grid_file(labels)), "x"), "x");
    CHECK(std::equal(labels_back.begin(), labels_back.end(), labels.begin(), labels.end()));
    // Geometry is stored as f32.
    CHECK(labels_back.geometry().voxel_size == static_cast<double>(0.05f));
    CHECK(labels_back.geometry().origin.x() == -1.25);
    const auto lga_back =
        ssc::io::to_lga(ssc::io::decode_grid(ssc::io::encode_grid(ssc::io::make_lga_file(lga)), "x"), "x");
    CHECK(std::equal(lga_back.begin(), lga_back.end(), lga.begin(), lga.end()));
    CHECK(ssc::io::to_scalars(ssc::io::decode_grid(ssc::io::encode_grid(ssc::io::make_grid_file(scalars)), "x"), "x")
              .values()[7] == scalars[7]);
  }

  TEST_CASE("geometry representable in f32 round-trips exactly") {
    const ssc::GridGeometry g{{4, 2, 3}, 0.03125, {-2.5, 0.75, 1.0}};
    const auto labels = ssc::synth::random_labels(g, 4);
    CHECK(ssc::io::to_labels(ssc::io::decode_grid(ssc::io::encode_grid(ssc::io::make_grid_file(labels)), "x"), "x") ==
          labels);
  }

  TEST_CASE("files on disk round-trip") {
    const ssc::testing::TempDir dir("io");
    const auto labels = ssc::synth::random_labels(odd_geometry(), 9);
    const auto file = ssc::io::make_grid_file(labels);
    ssc::io::write_grid(dir.file("a.vxg"), file);
    ssc::io::write_grid(dir.file("b.vxg"), ssc::io::read_grid(dir.file("a.vxg")));
    CHECK(ssc::io::read_file(dir.file("a.vxg")) == ssc::io::read_file(dir.file("b.vxg")));
    CHECK_THROWS_AS(ssc::io::read_file(dir.file("missing.vxg")), ssc::IoError);
  }

  TEST_CASE("truncated payload reports expected and actual length") {
    Bytes b = ssc::io::encode_grid(ssc::io::make_grid_file(ssc::LabelGrid(odd_geometry())));
    b.resize(b.size() - 10);
    try {
      ssc::io::decode_grid(b, "short.vxg");
      FAIL("expected a FormatError");
    } catch (const FormatError& e) {
      CHECK(e.source() == "short.vxg");
      CHECK(e.offset() == ssc::io::kGridHeaderSize);
      CHECK(std::string(e.what()).find("50 bytes, expected 60") != std::string::npos);
    }
  }

  TEST_CASE("bad magic, dtype and values") {
    Bytes b = ssc::io::encode_grid(ssc::io::make_grid_file(ssc::LabelGrid(odd_geometry())));
    Bytes magic = b;
    magic[0] = 'X';
    CHECK_THROWS_AS(ssc::io::decode_grid(magic, "m"), FormatError);

    Bytes dtype = b;
    dtype[4] = 9;
    try {
      ssc::io::decode_grid(dtype, "d");
      FAIL("expected a FormatError");
    } catch (const FormatError& e) {
      CHECK(e.offset() == 4);
    }

    Bytes label = b;
    label[ssc::io::kGridHeaderSize + 7] = 12;
    const auto decoded = ssc::io::decode_grid(label, "l");
    try {
      ssc::io::to_labels(decoded, "l");
      FAIL("expected a FormatError");
    } catch (const FormatError& e) {
      CHECK(e.offset() == ssc::io::kGridHeaderSize + 7);
    }

    CHECK_THROWS_AS(ssc::io::to_lga(ssc::io::decode_grid(b, "l"), "l"), FormatError);
    CHECK_THROWS_AS(ssc::io::decode_grid(Bytes(b.begin(), b.begin() + 10), "h"), FormatError);
  }
}

TEST_SUITE("depth files") {
  TEST_CASE("millimeter storage and round trip") {
    ssc::DepthMap depth(3, 2, std::vector<double>{0.0, 1.0, 2.5, 0.001, 65.535, 1.2344});
    const Bytes b = ssc::io::encode_depth(depth);
    REQUIRE(b.size() == ssc::io::kDepthHeaderSize + 12);
    CHECK(std::string(b.begin(), b.begin() + 4) == "DPM1");
    CHECK(b[12 + 2] == (1000 & 0xff));
    CHECK(b[12 + 3] == (1000 >> 8));
    const ssc::DepthMap back = ssc::io::decode_depth(b, "d");
    CHECK(back.at(1, 0) == 1.0);
    CHECK(back.at(2, 1) == doctest::Approx(1.234));
    CHECK_FALSE(back.valid(0, 0));
    CHECK(ssc::io::encode_depth(back) == b);
  }

  TEST_CASE("depths outside u16 millimeters are rejected") {
    CHECK_THROWS_AS(ssc::io::encode_depth(ssc::DepthMap(1, 1, std::vector<double>{70.0})), ssc::DomainError);
  }

  TEST_CASE("short payload") {
    Bytes b = ssc::io::encode_depth(ssc::DepthMap(4, 4, 1.0));
    b.pop_back();
    CHECK_THROWS_WITH_AS(ssc::io::decode_depth(b, "d.dpm"), doctest::Contains("31 bytes, expected 32"),
                         FormatError);
  }
}

TEST_SUITE("score files") {
  TEST_CASE("round trip and softmax for logits") {
    ssc::io::ScoreFile f{ssc::io::ScoreKind::kLogits, 2, 3, {0.0, 0.0, 0.0, 1.0, 2.0, 3.0}};
    const Bytes b = ssc::io::encode_scores(f);
    CHECK(b.size() == ssc::io::kScoreHeaderSize + 48);
    const auto back = ssc::io::decode_scores(b, "s");
    CHECK(ssc::io::encode_scores(back) == b);
    const auto p = back.probabilities();
    CHECK(p(0, 1) == doctest::Approx(1.0 / 3.0));

    ssc::io::ScoreFile bad{ssc::io::ScoreKind::kProbabilities, 1, 2, {0.7, 0.7}};
    CHECK_THROWS_AS(ssc::io::decode_scores(ssc::io::encode_scores(bad), "s").probabilities(),
                    std::invalid_argument);
  }

  TEST_CASE("unknown kind and short payload") {
    Bytes b = ssc::io::encode_scores({ssc::io::ScoreKind::kProbabilities, 1, 2, {0.5, 0.5}});
    Bytes kind = b;
    kind[4] = 7;
    CHECK_THROWS_AS(ssc::io::decode_scores(kind, "s"), FormatError);
    b.resize(b.size() - 3);
    CHECK_THROWS_WITH_AS(ssc::io::decode_scores(b, "s"), doctest::Contains("expected 16"), FormatError);
  }
}

TEST_SUITE("camera files") {
  TEST_CASE("format then parse is exact and stable") {
    const Eigen::Matrix3d r = Eigen::AngleAxisd(0.3, Eigen::Vector3d(1, 2, 3).normalized()).toRotationMatrix();
    const ssc::io::CameraModel cam{{518.8579, 519.4696, 325.5824, 253.7362}, ssc::CameraPose(r, {0.1, -0.2, 1.7})};
    const std::string text = ssc::io::format_camera(cam);
    const auto back = ssc::io::parse_camera(text, "c");
    CHECK(back.intrinsics.fx == cam.intrinsics.fx);
    CHECK(back.pose.rotation() == cam.pose.rotation());
    CHECK(back.pose.translation() == cam.pose.translation());
    CHECK(ssc::io::format_camera(back) == text);
  }

  TEST_CASE("comments and blank lines are ignored") {
    const auto cam = ssc::io::parse_camera(
        "# intrinsics\n10 10 5 5\n\n1 0 0\n0 1 0\n# mid\n0 0 1\n0 0 0\n", "c");
    CHECK(cam.intrinsics.cx == 5.0);
  }

  TEST_CASE("parse errors carry an offset") {
    CHECK_THROWS_AS(ssc::io::parse_camera("10 10 5\n1 0 0\n0 1 0\n0 0 1\n0 0 0\n", "c"), FormatError);
    CHECK_THROWS_AS(ssc::io::parse_camera("10 10 5 5\n1 0 0\n0 1 0\n0 0 1\n", "c"), FormatError);
    CHECK_THROWS_AS(ssc::io::parse_camera("10 10 5 5\n1 0 0\n0 1 0\n0 0 1\n0 0 zero\n", "c"), FormatError);
    try {
      ssc::io::parse_camera("10 10 5 5\n2 0 0\n0 1 0\n0 0 1\n0 0 0\n", "c");
      FAIL("expected a FormatError");
    } catch (const FormatError& e) {
      CHECK(e.offset() == 10);
    }
  }
}
