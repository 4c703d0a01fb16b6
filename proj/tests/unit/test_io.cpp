#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>

#include "hpcfe/bench.hpp"
#include "hpcfe/error.hpp"
#include "hpcfe/io.hpp"
#include "hpcfe/uq.hpp"

using namespace hpcfe;
namespace fs = std::filesystem;

namespace {

FidelityDataset small_dataset() {
  FidelityDataset d;
  d.bounds = InputBounds::unit_box(2);
  FidelityLevel a;
  a.level = 1;
  a.x.resize(6, 2);
  a.x << 0.1, 0.2, 0.3, 0.9, 1.0 / 3.0, 0.5, 0.7, 0.05, 0.95, 0.4, 0.0, 1.0;
  a.y.resize(6);
  for (int i = 0; i < 6; ++i) a.y[i] = std::sin(10 * a.x(i, 0)) + std::exp(a.x(i, 1)) / 7.0;
  FidelityLevel b;
  b.level = 2;
  b.x = a.x.topRows(4);
  b.y = (a.y.head(4).array() * 1.1 + 1e-17).matrix();
  d.levels = {a, b};
  return d;
}

template <class F>
std::string error_of(F&& f) {
  try {
    f();
  } catch (const ValidationError& e) {
    return e.what();
  }
  return "";
}

fs::path temp_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("hpcfe_io_test_" + name);
  fs::remove_all(p);
  return p;
}

}  // namespace

TEST(FormatDouble, ShortestRoundTrip) {
  for (double v : {0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23, 0.0, 123456789.123456789}) {
    const std::string s = io::format_double(v);
    EXPECT_EQ(std::stod(s), v) << s;
  }
  EXPECT_EQ(io::format_double(0.5), "0.5");
}

TEST(Csv, FidelityRoundTripIsExact) {
  const FidelityDataset d = small_dataset();
  const std::string text = io::fidelity_to_csv(d);
  const FidelityDataset back = io::fidelity_from_csv(text, "mem");
  ASSERT_EQ(back.levels.size(), 2u);
  for (std::size_t l = 0; l < 2; ++l) {
    EXPECT_EQ(back.levels[l].x, d.levels[l].x);
    EXPECT_EQ(back.levels[l].y, d.levels[l].y);
  }
  EXPECT_EQ(io::fidelity_to_csv(back), text);
}

TEST(Csv, HeaderSchema) {
  EXPECT_EQ(io::fidelity_to_csv(small_dataset()).substr(0, 14), "x1,x2,y,level\n");
}

TEST(Csv, MissingLevelColumn) {
  const std::string msg = error_of([] { io::fidelity_from_csv("x1,y\n0.1,2\n", "data.csv"); });
  EXPECT_NE(msg.find("data.csv:1"), std::string::npos) << msg;
  EXPECT_NE(msg.find("schema"), std::string::npos) << msg;
}

TEST(Csv, NonNumericFieldReportsLine) {
  const std::string msg = error_of([] { io::fidelity_from_csv("x1,y,level\n0.1,2,1\n0.2,abc,1\n", "data.csv"); });
  EXPECT_NE(msg.find("data.csv:3"), std::string::npos) << msg;
}

TEST(Csv, WrongFieldCountReportsLine) {
  const std::string msg = error_of([] { io::fidelity_from_csv("x1,y,level\n0.1,2,1\n\n0.2,1\n", "d.csv"); });
  EXPECT_NE(msg.find("d.csv:4"), std::string::npos) << msg;
}

TEST(Csv, LevelGapsRejected) {
  EXPECT_THROW(io::fidelity_from_csv("x1,y,level\n0.1,2,1\n0.2,1,3\n", "d.csv"), ValidationError);
  EXPECT_THROW(io::fidelity_from_csv("x1,y,level\n0.1,2,1.5\n", "d.csv"), ValidationError);
}

TEST(Csv, BucklingSampleParsesToFiveInputs) {
  const auto specs = bench::plate_input_distributions();
  const uq::SampleBatch batch = uq::sample(specs, 20, 3);
  FidelityDataset d;
  d.bounds = uq::training_bounds(specs);
  FidelityLevel lv;
  lv.x = batch.values;
  lv.y.resize(20);
  for (int i = 0; i < 20; ++i) {
    const auto r = batch.values.row(i);
    lv.y[i] = bench::buckling(1, {r[0], r[1], r[2], r[3], r[4]});
  }
  d.levels = {lv};
  const FidelityDataset back = io::fidelity_from_csv(io::fidelity_to_csv(d), "buckling.csv");
  EXPECT_EQ(back.dim(), 5);
  EXPECT_EQ(back.levels[0].y, lv.y);
}

TEST(Csv, InputsAndBom) {
  const Eigen::MatrixXd x = io::inputs_from_csv("\xEF\xBB\xBFx1,x2\n1,2\n3,4\n", "q.csv");
  EXPECT_EQ(x.rows(), 2);
  EXPECT_EQ(x(1, 0), 3.0);
  EXPECT_THROW(io::inputs_from_csv("x2,x1\n1,2\n", "q.csv"), ValidationError);
  EXPECT_THROW(io::inputs_from_csv("x1\nnan\n", "q.csv"), ValidationError);
}

TEST(Csv, MeasurementsRoundTrip) {
  twin::MeasurementSeries lf, hf;
  lf.fidelity = twin::Fidelity::Low;
  hf.fidelity = twin::Fidelity::High;
  lf.records = {{0.0, 1.0, 0.88, 1}, {0.5, 0.99, 0.87, 1}};
  hf.records = {{0.0, 1.0, 0.881, 1}};
  const std::string text = io::measurements_to_csv({lf, hf});
  const auto back = io::measurements_from_csv(text, "m.csv");
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(back[0].fidelity, twin::Fidelity::Low);
  EXPECT_EQ(back[0].records[1].payload_b, 0.87);
  EXPECT_EQ(back[1].records[0].payload_b, 0.881);
  EXPECT_EQ(io::measurements_to_csv(back), text);
}

TEST(Csv, MeasurementsValidation) {
  const std::string header = "t_s,fidelity,domain,payload_a,payload_b,n\n";
  EXPECT_THROW(io::measurements_from_csv(header + "0,low,time,1,0.9,1\n0,low,time,1,0.9,1\n", "m.csv"), ValidationError);
  EXPECT_THROW(io::measurements_from_csv(header + "0,medium,time,1,0.9,1\n", "m.csv"), ValidationError);
  EXPECT_THROW(io::measurements_from_csv(header + "0,low,time,1,0.9,1\n1,high,frequency,25,1,0\n", "m.csv"),
               ValidationError);
  EXPECT_THROW(io::measurements_from_csv("t_s,fidelity\n0,low\n", "m.csv"), ValidationError);
}

TEST(Json, ConfigRoundTripAndStrictKeys) {
  HpcfeConfig c;
  c.basis.degree = 3;
  c.kernel.nugget = 1e-10;
  c.zero_mean_trend = true;
  c.weight_matrix = Eigen::MatrixXd::Identity(2, 2) * 2.0;
  const HpcfeConfig back = io::config_from_json(io::to_json(c));
  EXPECT_EQ(back.basis.degree, 3);
  EXPECT_EQ(back.kernel.nugget, 1e-10);
  EXPECT_TRUE(back.zero_mean_trend);
  ASSERT_TRUE(back.weight_matrix.has_value());
  EXPECT_EQ(*back.weight_matrix, *c.weight_matrix);
  EXPECT_THROW(io::config_from_json(nlohmann::json{{"degree", 3}}), ValidationError);
  EXPECT_THROW(io::config_from_json(nlohmann::json{{"basis", {{"family", "hermite"}}}}), ValidationError);
  EXPECT_THROW(io::config_from_json(nlohmann::json{{"basis", {{"degree", "five"}}}}), ValidationError);
}

TEST(Json, ModelRoundTripIsIdempotent) {
  const FidelityDataset d = small_dataset();
  const HpcfeModel m = train(HpcfeConfig{}, d.bounds, d.levels[0].x, d.levels[0].y);
  const nlohmann::json j = io::to_json(m);
  const HpcfeModel back = io::model_from_json(nlohmann::json::parse(j.dump()));
  EXPECT_EQ(io::to_json(back).dump(), j.dump());
  const Eigen::MatrixXd probe = Eigen::MatrixXd::Constant(3, 2, 0.37);
  EXPECT_EQ(back.predict(probe).mean, m.predict(probe).mean);
}

TEST(Json, CascadeRoundTrip) {
  const FidelityDataset d = small_dataset();
  CascadeOptions opts;
  HpcfeConfig cfg;
  cfg.basis.degree = 2;
  opts.configs = {cfg};
  const CascadeTrainResult r = train_cascade(opts, d);
  const nlohmann::json j = io::to_json(r.model);
  EXPECT_EQ(j["format"], "hpcfe-cascade");
  const DeepHpcfeModel back = io::cascade_from_json(nlohmann::json::parse(j.dump()));
  EXPECT_EQ(io::to_json(back).dump(), j.dump());
  const Eigen::MatrixXd probe = Eigen::MatrixXd::Constant(2, 2, 0.61);
  EXPECT_EQ(back.predict(probe).top().mean, r.model.predict(probe).top().mean);
  // a single model loads as a one-level cascade
  EXPECT_EQ(io::any_model_from_json(io::to_json(r.model.stages()[0])).level_count(), 1u);
}

TEST(Json, WrongFormatRejected) {
  EXPECT_THROW(io::model_from_json(nlohmann::json{{"format", "other"}}), ValidationError);
  EXPECT_THROW(io::any_model_from_json(nlohmann::json{{"format", "other"}}), ValidationError);
  nlohmann::json j = io::to_json(train(HpcfeConfig{}, small_dataset().bounds, small_dataset().levels[0].x,
                                       small_dataset().levels[0].y));
  j["version"] = 99;
  EXPECT_THROW(io::model_from_json(j), ValidationError);
}

TEST(Files, AtomicWriteAndHash) {
  const fs::path dir = temp_dir("atomic");
  const fs::path target = dir / "nested" / "out.txt";
  io::write_file_atomic(target, "abc");
  EXPECT_EQ(io::read_file(target), "abc");
  io::write_file_atomic(target, "replaced");
  EXPECT_EQ(io::read_file(target), "replaced");
  std::size_t files = 0;
  for ([[maybe_unused]] const auto& e : fs::directory_iterator(target.parent_path())) ++files;
  EXPECT_EQ(files, 1u);
  EXPECT_EQ(io::sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  EXPECT_THROW(io::read_file(dir / "missing.txt"), ValidationError);
  fs::remove_all(dir);
}
