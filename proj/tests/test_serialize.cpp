#include <catch2/catch_amalgamated.hpp>

#include "owd/bench.hpp"
#include "owd/serialize.hpp"

using namespace owd;

namespace {

LabeledDataset small_set(Scheme kind, int n, int k, std::uint64_t seed) {
    ChannelConfig cfg;
    cfg.snr_db = 25.0;
    return build_dataset(ModulationScheme::of(kind), n, k, cfg, seed);
}

}  // namespace

TEST_CASE("cnn round trip is value-exact") {
    auto p = CnnParams::make(Scheme::qam16, 40, 16, 9);
    auto bytes = model_to_bytes(p);
    auto loaded = std::get<CnnParams>(model_from_bytes(bytes));
    CHECK(loaded.scheme_kind == p.scheme_kind);
    CHECK(loaded.n == p.n);
    CHECK(loaded.n_classes == p.n_classes);
    for (int i = 0; i < 6; ++i)
        CHECK(loaded.k1[std::size_t(i)].a == p.k1[std::size_t(i)].a);
    CHECK(loaded.b1 == p.b1);
    for (int j = 0; j < 12; ++j)
        for (int i = 0; i < 6; ++i)
            CHECK(loaded.k2[std::size_t(j)][std::size_t(i)].a ==
                  p.k2[std::size_t(j)][std::size_t(i)].a);
    CHECK(loaded.b2 == p.b2);
    CHECK(loaded.fc.w.a == p.fc.w.a);
    CHECK(loaded.fc.b == p.fc.b);
    CHECK(model_to_bytes(loaded) == bytes);
}

TEST_CASE("dbn round trip is value-exact") {
    auto p = make_dbn(Scheme::qpsk, 20, {6, 5, 8}, 4, 17);
    auto bytes = model_to_bytes(p);
    auto loaded = std::get<DbnParams>(model_from_bytes(bytes));
    CHECK(loaded.hidden_sizes() == p.hidden_sizes());
    CHECK(loaded.rbm1.w.a == p.rbm1.w.a);
    CHECK(loaded.rbm1.a == p.rbm1.a);
    CHECK(loaded.rbm1.b == p.rbm1.b);
    CHECK(loaded.rbm2.w.a == p.rbm2.w.a);
    CHECK(loaded.rbm3.w.a == p.rbm3.w.a);
    CHECK(loaded.out.w.a == p.out.w.a);
    CHECK(loaded.out.b == p.out.b);
    CHECK(model_to_bytes(loaded) == bytes);
}

TEST_CASE("adaboost round trip keeps subsets, betas and the dataset") {
    auto train = small_set(Scheme::qpsk, 20, 64, 3);
    auto model = train_adaboost(train, 4, 5);
    auto bytes = model_to_bytes(model);
    auto loaded = std::get<AdaBoostModel>(model_from_bytes(bytes));
    REQUIRE(loaded.learners.size() == model.learners.size());
    for (std::size_t i = 0; i < loaded.learners.size(); ++i) {
        CHECK(loaded.learners[i].subset == model.learners[i].subset);
        CHECK(loaded.learners[i].beta == model.learners[i].beta);
    }
    REQUIRE(loaded.training_set.k() == train.k());

    // classification agrees on fresh queries (training frames pass through
    // an f32 round trip, so compare decisions, not raw floats)
    auto queries = small_set(Scheme::qpsk, 20, 16, 7);
    for (const auto& f : queries.frames)
        CHECK(classify(loaded, f).label == classify(model, f).label);
    CHECK(model_to_bytes(loaded) == bytes);
}

TEST_CASE("mld round trip is value-exact and classifies identically") {
    auto train = small_set(Scheme::qam16, 20, 160, 11);
    auto params = fit_mld(train);
    auto bytes = model_to_bytes(params);
    auto loaded = std::get<MldParams>(model_from_bytes(bytes));
    REQUIRE(loaded.classes.size() == params.classes.size());
    for (std::size_t z = 0; z < params.classes.size(); ++z) {
        CHECK(loaded.classes[z].mean == params.classes[z].mean);
        CHECK(loaded.classes[z].cov.a == params.classes[z].cov.a);
    }
    auto queries = small_set(Scheme::qam16, 20, 32, 13);
    for (const auto& f : queries.frames)
        CHECK(classify(loaded, f).label == classify(params, f).label);
    CHECK(model_to_bytes(loaded) == bytes);
}

TEST_CASE("model loading reports structured errors") {
    auto p = CnnParams::make(Scheme::ook, 40, 2, 1);
    auto bytes = model_to_bytes(p);

    auto truncated = bytes.substr(0, bytes.size() / 2);
    try {
        model_from_bytes(truncated);
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(std::string(e.what()).find("byte") != std::string::npos);
    }

    auto bad_magic = bytes;
    bad_magic[0] = 'Z';
    CHECK_THROWS_AS(model_from_bytes(bad_magic), ParseError);

    auto bad_version = bytes;
    bad_version[3] = '9';
    CHECK_THROWS_AS(model_from_bytes(bad_version), ParseError);

    auto bad_kind = bytes;
    bad_kind[4] = 42;
    CHECK_THROWS_AS(model_from_bytes(bad_kind), ParseError);
}

TEST_CASE("file round trip through save_model/load_model") {
    auto train = small_set(Scheme::ook, 10, 32, 19);
    auto params = fit_mld(train);
    std::string path = "/tmp/owd_test_model.owm";
    save_model(params, path);
    auto loaded = load_model(path);
    CHECK(kind_of(loaded) == ModelKind::mld);
    CHECK(std::get<MldParams>(loaded).classes.size() == 2);
    std::remove(path.c_str());
}
