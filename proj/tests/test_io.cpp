#include <gtest/gtest.h>

#include "rgap/io.hpp"

using namespace rgap;

TEST(IoGapSpec, RoundTrip) {
    for (const auto& s : {GapSpec::ap({3, -1}, 9, 1, {4, 4}), GapSpec::gap({1, 0}, {2, 5}, 3, 7, 0)})
        EXPECT_EQ(io::gap_spec_from_json(io::to_json(s)), s);
    EXPECT_THROW(io::gap_spec_from_json(io::json{{"w1", {0, 0}}, {"d1", 3}}), std::invalid_argument);
}

TEST(IoDescriptor, RoundTrip) {
    const auto built = build_bad_set(0.25, 6);
    const auto j = io::to_json(built);
    EXPECT_EQ(j.at("schema"), "rgap/1");
    EXPECT_EQ(j.at("truncation_W"), 6);
    const auto back = io::descriptor_from_json(io::json::parse(io::dump(j)));
    EXPECT_TRUE(back == built);
    EXPECT_EQ(io::dump(io::to_json(back)), io::dump(j));

    const auto explicit_family = BadSetDescriptor::from_strips({{{1, 0}, 0.1}, {{2, 3}, 0.01}});
    EXPECT_TRUE(io::descriptor_from_json(io::to_json(explicit_family)) == explicit_family);

    auto bad = j;
    bad["schema"] = "other/2";
    EXPECT_THROW(io::descriptor_from_json(bad), std::invalid_argument);
}

TEST(IoFourier, DenseRoundTrip) {
    const auto t = fourier_coefficients(rasterize(build_bad_set(0.5, 3), 128), 20);
    const auto j = io::to_json(t);
    // one of each +-lambda pair
    EXPECT_LE(j.at("coefficients").size(), (41u * 41u + 1u) / 2u);
    const auto back = io::fourier_from_json(io::json::parse(io::dump(j)));
    EXPECT_TRUE(back == t);
}

TEST(IoFourier, SeparableRoundTrip) {
    const auto t = rect_table(0, 0.6, 0.1, 0.5, 300);
    const auto back = io::fourier_from_json(io::json::parse(io::dump(io::to_json(t))));
    EXPECT_TRUE(back == t);
    EXPECT_EQ(back.at({17, -4}), t.at({17, -4}));
}

TEST(IoCsv, Quoting) {
    EXPECT_EQ(io::csv_field("plain"), "plain");
    EXPECT_EQ(io::csv_field("(3,0)"), "\"(3,0)\"");
    EXPECT_EQ(io::csv_field("say \"hi\""), "\"say \"\"hi\"\"\"");
    EXPECT_EQ(io::csv_row({"a", "b,c"}), "a,\"b,c\"\r\n");
}

TEST(IoCsv, DecayTable) {
    DecayRow r;
    r.N = 4;
    r.alpha = 0.5;
    r.report.spec = GapSpec::ap({2, 0}, 16, 1);
    r.report.value = 0.25;
    r.report.bound = 2.0;
    r.report.ratio = 0.125;
    const auto csv = io::decay_csv({r});
    EXPECT_EQ(csv, "N,alpha,step_w1,step_w2,value,bound,ratio\r\n4,0.5,\"(2,0)\",,0.25,2,0.125\r\n");
    EXPECT_EQ(io::decay_plot_csv({r}), "N,value,bound\r\n4,0.25,2\r\n");
}

TEST(IoAssembly, EmptyMarker) {
    const auto a = assemble_lambda(rect_table(0, 0.6, 0, 0.6, 64), {}, 0.5);
    const auto j = io::to_json(a);
    EXPECT_TRUE(j.at("empty").get<bool>());
    EXPECT_TRUE(j.at("global_gamma").is_null());
    EXPECT_TRUE(j.at("sections").empty());
}
