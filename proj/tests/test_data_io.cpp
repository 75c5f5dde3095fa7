#include "doctest.h"

#include "fatmargin/data_io.hpp"
#include "fatmargin/error.hpp"
#include "oracles.hpp"

#include <filesystem>
#include <random>
#include <sstream>

using namespace fatmargin;

namespace {

const std::string kData = FATMARGIN_DATA_DIR;
const std::string kFixtures = std::string(FATMARGIN_TEST_DIR) + "/fixtures";

Dataset parse(const std::string& text, const CsvOptions& options = {})
{
    std::istringstream in(text);
    return read_csv(in, options);
}

std::string error_of(const std::string& text, const CsvOptions& options = {})
{
    try {
        parse(text, options);
    } catch (const DataError& e) {
        return e.what();
    }
    return "";
}

KernelModel haberman_kernel_model()
{
    const auto d = load_csv(kData + "/haberman.csv");
    std::vector<std::size_t> rows;
    for (std::size_t i = 0; i < d.size(); i += 3)
        rows.push_back(i);
    KernelTrainConfig cfg;
    cfg.C = 1.0;
    cfg.fuzzy = true;
    cfg.kernel = KernelSpec::gaussian(1e-4);
    return train_kernel(d.subset(rows), cfg);
}

} // namespace

TEST_CASE("haberman loads with the larger label as the positive class")
{
    const auto d = load_csv(kData + "/haberman.csv");
    CHECK(d.size() == 306);
    CHECK(d.dimension() == 3);
    CHECK(d.count(1) == 81);
    CHECK(d.count(-1) == 225);
    CHECK(d.feature_names == std::vector<std::string>{"age", "op_year", "pos_nodes"});
    CHECK(d.source_columns == 4);
    CHECK(d.features(0, 0) == 38.0);

    CsvOptions opt;
    opt.positive_label = "1";
    const auto flipped = load_csv(kData + "/haberman.csv", opt);
    CHECK(flipped.count(1) == 225);
}

TEST_CASE("label column selection and headerless input")
{
    const auto d = parse("y,a,b\nneg,1,2\npos,3,4\n", [] {
        CsvOptions o;
        o.label_column = "y";
        o.positive_label = "pos";
        return o;
    }());
    CHECK(d.labels == std::vector<int>{-1, 1});
    CHECK(d.features(1, 1) == 4.0);

    CsvOptions by_index;
    by_index.label_column = "0";
    const auto e = parse("5,1.5,2\n7,3,4\n", by_index);
    CHECK(e.feature_names == std::vector<std::string>{"x1", "x2"});
    CHECK(e.labels == std::vector<int>{-1, 1});

    const auto keep = parse("a,b,c\n1,2,-1\n3,4,1\n");
    CHECK(keep.labels == std::vector<int>{-1, 1});

    CsvOptions semi;
    semi.delimiter = ';';
    CHECK(parse("1;2;0\n3;4;1\n", semi).size() == 2);
}

TEST_CASE("malformed csv input is reported with its row")
{
    CHECK(error_of("a,b,y\n1,2,0\n3,?,1\n").find("row 3") != std::string::npos);
    CHECK(error_of("a,b,y\n1,2,0\n3,,1\n").find("missing value") != std::string::npos);
    CHECK(error_of("a,b,y\n1,2,0\n3,abc,1\n").find("non-numeric") != std::string::npos);
    CHECK(error_of("a,b,y\n1,2,0\n3,4\n").find("row 3") != std::string::npos);
    CHECK(error_of("a,b,y\n1,2,0\n3,4,1\n5,6,2\n").find("unknown label value") != std::string::npos);
    CHECK(error_of("a,b,y\n1,2,0\n3,4,0\n").find("single class") != std::string::npos);
    CHECK(error_of("a,b,y\n").find("no data rows") != std::string::npos);
    CsvOptions opt;
    opt.positive_label = "7";
    CHECK(error_of("1,2,0\n3,4,1\n", opt).find("unknown label value") != std::string::npos);
    CHECK_THROWS_AS(load_csv(kFixtures + "/single_class.csv"), DataError);
    CHECK_THROWS_AS(load_csv(kFixtures + "/missing.csv"), DataError);
    CHECK_THROWS_AS(load_csv(kFixtures + "/does_not_exist.csv"), DataError);
}

TEST_CASE("incomplete inputs are allowed for prediction")
{
    CsvOptions opt;
    opt.allow_incomplete = true;
    CHECK(parse("a,b,y\n", opt).size() == 0);
    CHECK(parse("a,b,y\n1,2,1\n", opt).size() == 1);
    std::istringstream features("a,b\n1,2\n3,4\n");
    const auto m = read_feature_csv(features);
    CHECK(m.rows() == 2);
    CHECK(m(1, 0) == 3.0);
}

TEST_CASE("linear model round trip is exact")
{
    const auto d = load_csv(kFixtures + "/separable.csv");
    TrainConfig cfg;
    const auto m = train_linear(d, cfg);
    ModelFile file{m, {"separable", std::nullopt, 4}};
    const auto text = serialize_model(file);
    const auto back = deserialize_model(text);
    CHECK(serialize_model(back) == text);
    REQUIRE(std::holds_alternative<LinearModel>(back.model));
    const auto& lm = std::get<LinearModel>(back.model);
    CHECK(lm.w == m.w);
    CHECK(lm.b == m.b);
    CHECK(lm.standardization == m.standardization);
    CHECK(back.provenance.dataset == "separable");
    CHECK(back.provenance.seed == 4);
    for (std::size_t i = 0; i < d.size(); ++i)
        CHECK(predict(back.model, d.features.row(i)).score == predict_linear(m, d.features.row(i)).score);
}

TEST_CASE("kernel model round trip keeps predictions")
{
    const auto m = haberman_kernel_model();
    const auto text = serialize_model({m, {"haberman", 1e-4, std::nullopt}});
    const auto back = deserialize_model(text);
    REQUIRE(std::holds_alternative<KernelModel>(back.model));
    CHECK(model_dimension(back.model) == 3);
    CHECK(back.provenance.gamma == 1e-4);
    const auto d = load_csv(kData + "/haberman.csv");
    for (std::size_t i = 0; i < d.size(); i += 7) {
        const auto a = predict_kernel(m, d.features.row(i));
        const auto b = predict(back.model, d.features.row(i));
        CHECK(a.score == b.score);
        CHECK(a.label == b.label);
    }
}

TEST_CASE("golden model fixture still loads")
{
    const auto text = read_file(kFixtures + "/golden_linear.json");
    const auto file = deserialize_model(text);
    REQUIRE(std::holds_alternative<LinearModel>(file.model));
    CHECK(serialize_model(file) == text);
    const auto d = load_csv(kFixtures + "/separable.csv");
    for (std::size_t i = 0; i < d.size(); ++i)
        CHECK(predict(file.model, d.features.row(i)).label == d.labels[i]);
}

TEST_CASE("corrupt model files are rejected")
{
    const auto text = read_file(kFixtures + "/golden_linear.json");
    CHECK_THROWS_AS(deserialize_model(text.substr(0, text.size() / 2)), FormatError);
    CHECK_THROWS_AS(deserialize_model("{}"), FormatError);
    CHECK_THROWS_AS(deserialize_model("not json"), FormatError);
    auto bumped = text;
    const auto at = bumped.find("\"format_version\": 1");
    REQUIRE(at != std::string::npos);
    bumped.replace(at, 19, "\"format_version\": 9");
    CHECK_THROWS_AS(deserialize_model(bumped), FormatError);
}

TEST_CASE("closed-form export agrees with the model")
{
    const auto m = haberman_kernel_model();
    const auto text = export_closed_form(m);
    CHECK(text.rfind("f(x1, x2, x3) = sign{", 0) == 0);
    const oracle::Expression expr(text);
    CHECK(expr.count_exp() == m.support_count());

    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> age(30, 83), year(58, 69), nodes(0, 52);
    std::size_t agree = 0;
    for (int t = 0; t < 100; ++t) {
        const std::vector<double> x{age(rng), year(rng), nodes(rng)};
        agree += static_cast<int>(expr.evaluate(x)) == predict_kernel(m, x).label;
    }
    CHECK(agree == 100);
}

TEST_CASE("closed-form export of a hand-built model")
{
    KernelModel m;
    m.kernel = KernelSpec::gaussian(1e-4);
    m.standardization = StandardizationParams::identity(3);
    m.support_samples = Matrix(0, 3);
    const double a[] = {36, 69, 0};
    const double b[] = {62, 58, 0};
    m.support_samples.append_row(a);
    m.support_samples.append_row(b);
    m.support_lambdas = {-105.8063, 0.05};
    m.support_indices = {0, 1};
    m.b = -0.7661;
    const auto text = export_closed_form(m);
    CHECK(text.find("-105.8063 * exp[-1.00000000e-04 * ((x1 - 36.0000)^2") != std::string::npos);
    CHECK(text.find("+ 5.0000e-02 * exp") != std::string::npos);
    CHECK(text.find("- 0.7661 }") != std::string::npos);

    m.support_lambdas.clear();
    m.support_indices.clear();
    m.support_samples = Matrix(0, 3);
    CHECK(export_closed_form(m) == "f(x1, x2, x3) = sign{ -0.7661 }\n");

    m.kernel = KernelSpec::linear();
    CHECK_THROWS_AS(export_closed_form(m), ConfigError);
}

TEST_CASE("atomic writes replace the target")
{
    const auto dir = std::filesystem::temp_directory_path() / "fatmargin_io_test";
    std::filesystem::create_directories(dir);
    const auto path = dir / "out.txt";
    write_file_atomic(path, "first");
    write_file_atomic(path, "second");
    CHECK(read_file(path) == "second");
    std::size_t entries = 0;
    for ([[maybe_unused]] const auto& e : std::filesystem::directory_iterator(dir))
        ++entries;
    CHECK(entries == 1);
    std::filesystem::remove_all(dir);
}
