#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <stdexcept>

#include "lossrobust/synthgen.hpp"
#include "oracles.hpp"

using namespace lossrobust;
using namespace lossrobust::synthgen;

TEST_CASE("identical configurations give identical bytes") {
    GenConfig cfg;
    cfg.problem = Problem::Portfolio;
    cfg.n_samples = 300;
    cfg.noise = 0.3;
    cfg.seed = 42;
    LabeledDataset a = generate(cfg);
    LabeledDataset b = generate(cfg);
    CHECK(a.X.data == b.X.data);
    CHECK(a.Y.data == b.Y.data);
    CHECK(a.split == b.split);

    cfg.seed = 43;
    LabeledDataset c = generate(cfg);
    CHECK(a.X.data != c.X.data);
}

TEST_CASE("row counts, shapes, and split partitions follow the configuration") {
    GenConfig nv;
    nv.problem = Problem::Newsvendor;
    nv.n_samples = 150;
    nv.p = 10;
    LabeledDataset ds = generate(nv);
    CHECK(ds.X.rows == 150 + 150 + 10000); // val matches train, newsvendor test default
    CHECK(ds.X.cols == 10);
    CHECK(ds.Y.cols == 2);
    CHECK(ds.count(Split::Train) == 150);
    CHECK(ds.count(Split::Val) == 150);
    CHECK(ds.count(Split::Test) == 10000);

    GenConfig pf;
    pf.problem = Problem::Portfolio;
    pf.n_samples = 200;
    pf.n_val = 80;
    pf.n_test = 33;
    pf.n_assets = 5;
    pf.p = 7;
    LabeledDataset pds = generate(pf);
    CHECK(pds.X.rows == 200 + 80 + 33);
    CHECK(pds.X.cols == 7);
    CHECK(pds.Y.cols == 5);
    CHECK(pds.count(Split::Test) == 33);

    GenConfig sp;
    sp.problem = Problem::ShortestPath;
    sp.n_samples = 120;
    sp.grid_side = 5;
    LabeledDataset sds = generate(sp);
    CHECK(sds.Y.cols == 40); // 2 * 5 * 4 edges
    CHECK(sds.count(Split::Test) == 100); // vector-problem default

    // Splits partition the rows in order: train block, then val, then test.
    std::vector<std::size_t> train = ds.indices(Split::Train);
    std::vector<std::size_t> val = ds.indices(Split::Val);
    std::vector<std::size_t> test = ds.indices(Split::Test);
    CHECK(train.size() + val.size() + test.size() == ds.n_rows());
    std::set<std::size_t> seen;
    for (auto idx : {&train, &val, &test})
        for (std::size_t i : *idx) CHECK(seen.insert(i).second);
    CHECK(seen.size() == ds.n_rows());
    CHECK_NOTHROW(ds.validate());
}

TEST_CASE("newsvendor labels are balanced one-hot scenario indicators") {
    GenConfig cfg;
    cfg.problem = Problem::Newsvendor;
    cfg.n_samples = 10000;
    cfg.n_test = 10;
    cfg.seed = 9;
    LabeledDataset ds = generate(cfg);
    std::size_t low = 0, n = 0;
    for (std::size_t i = 0; i < ds.n_rows(); ++i) {
        double a = ds.Y(i, 0), b = ds.Y(i, 1);
        CHECK(((a == 1.0 && b == 0.0) || (a == 0.0 && b == 1.0)));
        if (ds.split[i] == Split::Train) {
            low += a == 1.0;
            ++n;
        }
    }
    // Symmetric threshold on a symmetric index: half the rows each way.
    double frac = double(low) / double(n);
    CHECK(std::fabs(frac - 0.5) <= oracles::binom3se(0.5, n));
    CHECK(ds.target_standardizer.empty());
}

TEST_CASE("vector targets are standardized on the training split only") {
    for (Problem problem : {Problem::Portfolio, Problem::ShortestPath}) {
        GenConfig cfg;
        cfg.problem = problem;
        cfg.n_samples = 400;
        cfg.noise = 0.5;
        cfg.deg = 2;
        cfg.seed = 31;
        LabeledDataset ds = generate(cfg);
        CHECK_FALSE(ds.target_standardizer.empty());
        std::vector<std::size_t> train = ds.indices(Split::Train);
        for (std::size_t j = 0; j < ds.Y.cols; ++j) {
            double m = 0.0;
            for (std::size_t i : train) m += ds.Y(i, j);
            m /= double(train.size());
            double v = 0.0;
            for (std::size_t i : train) v += (ds.Y(i, j) - m) * (ds.Y(i, j) - m);
            v /= double(train.size());
            CHECK(std::fabs(m) <= 1e-9);
            CHECK(std::fabs(std::sqrt(v) - 1.0) <= 1e-9);
        }
        // Val/test columns share the train transform, so they are close to
        // standardized but not exactly so.
        std::vector<std::size_t> test = ds.indices(Split::Test);
        double tm = 0.0;
        for (std::size_t i : test) tm += ds.Y(i, 0);
        tm /= double(test.size());
        CHECK(std::fabs(tm) < 0.5);
    }
}

TEST_CASE("the portfolio noise dial is multiplicative around the clean signal") {
    // Same seed, different noise: the mixing matrix and covariates come from
    // independent child streams, so the clean run recovers the signal that the
    // noisy run perturbed.  Multiplicative noise must scale with |signal|.
    GenConfig clean;
    clean.problem = Problem::Portfolio;
    clean.n_samples = 2000;
    clean.n_test = 10;
    clean.noise = 0.0;
    clean.seed = 77;
    GenConfig noisy = clean;
    noisy.noise = 1.0;
    LabeledDataset d0 = generate(clean);
    LabeledDataset d1 = generate(noisy);

    std::vector<double> signal, resid;
    for (std::size_t i : d0.indices(Split::Train))
        for (std::size_t j = 0; j < d0.Y.cols; ++j) {
            double s = d0.target_standardizer.invert(d0.Y(i, j), j);
            double y = d1.target_standardizer.invert(d1.Y(i, j), j);
            signal.push_back(std::fabs(s));
            resid.push_back(y - s);
        }
    std::vector<double> sorted = signal;
    std::nth_element(sorted.begin(), sorted.begin() + sorted.size() / 2, sorted.end());
    double med = sorted[sorted.size() / 2];
    double hi = 0.0, lo = 0.0;
    std::size_t nhi = 0, nlo = 0;
    for (std::size_t k = 0; k < signal.size(); ++k) {
        if (signal[k] > med) {
            hi += resid[k] * resid[k];
            ++nhi;
        } else {
            lo += resid[k] * resid[k];
            ++nlo;
        }
    }
    CHECK(hi / double(nhi) > 2.0 * (lo / double(nlo)));
}

TEST_CASE("the shortest-path degree dial bends the signal nonlinearly") {
    GenConfig lin;
    lin.problem = Problem::ShortestPath;
    lin.n_samples = 500;
    lin.n_test = 10;
    lin.deg = 1;
    lin.seed = 55;
    GenConfig quart = lin;
    quart.deg = 4;
    LabeledDataset a = generate(lin);
    LabeledDataset b = generate(quart);
    // Same seed shares B and X; the raw (pre-standardization) scale must blow
    // up with the exponent: (z+3)^4 dwarfs (z+3)^1 around z = 0.
    CHECK(b.target_standardizer.std[0] > 5.0 * a.target_standardizer.std[0]);
    CHECK(b.target_standardizer.mean[0] > a.target_standardizer.mean[0]);
}

TEST_CASE("configuration errors are rejected") {
    GenConfig cfg;
    cfg.n_samples = 0;
    CHECK_THROWS_AS(generate(cfg), std::invalid_argument);
    cfg = GenConfig{};
    cfg.p = 0;
    CHECK_THROWS_AS(generate(cfg), std::invalid_argument);
    cfg = GenConfig{};
    cfg.noise = -0.1;
    CHECK_THROWS_AS(generate(cfg), std::invalid_argument);
    cfg = GenConfig{};
    cfg.problem = Problem::Portfolio;
    cfg.n_assets = 0;
    CHECK_THROWS_AS(generate(cfg), std::invalid_argument);
    cfg = GenConfig{};
    cfg.problem = Problem::ShortestPath;
    cfg.grid_side = 1;
    CHECK_THROWS_AS(generate(cfg), std::invalid_argument);
    cfg = GenConfig{};
    cfg.problem = Problem::ShortestPath;
    cfg.deg = 0;
    CHECK_THROWS_AS(generate(cfg), std::invalid_argument);
}

TEST_CASE("datasets round-trip through CSV exactly") {
    GenConfig cfg;
    cfg.problem = Problem::Portfolio;
    cfg.n_samples = 40;
    cfg.n_val = 10;
    cfg.n_test = 5;
    cfg.noise = 0.7;
    cfg.seed = 3;
    cfg.p = 3;
    cfg.n_assets = 2;
    LabeledDataset ds = generate(cfg);

    namespace fs = std::filesystem;
    const fs::path dir = fs::temp_directory_path() / "lossrobust_synthgen_test";
    fs::create_directories(dir);
    const std::string path = (dir / "data.csv").string();
    save_dataset_csv(ds, path);

    std::ifstream in(path);
    std::string header;
    std::getline(in, header);
    CHECK(header == "x1,x2,x3,y1,y2,split");
    in.close();

    LabeledDataset rt = load_dataset_csv(path);
    CHECK(rt.X.data == ds.X.data);
    CHECK(rt.Y.data == ds.Y.data);
    CHECK(rt.split == ds.split);

    CHECK_THROWS_AS(load_dataset_csv((dir / "missing.csv").string()), std::runtime_error);
    fs::remove_all(dir);
}
