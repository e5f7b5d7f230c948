#include <algorithm>
#include <random>

#include <gtest/gtest.h>

#include "mfhar/error.hpp"
#include "mfhar/routing.hpp"

using namespace mfhar;

namespace {

Detection det(BodyForm f, double x = 0) { return Detection(Box(x, 0, 10, 10), f, 0.9); }

}  // namespace

TEST(ActionKind, RejectsBadNames) {
    EXPECT_THROW(ActionKind(""), PreconditionError);
    EXPECT_THROW(ActionKind("Fall"), PreconditionError);
    EXPECT_THROW(ActionKind("on-duty"), PreconditionError);
    EXPECT_EQ(ActionKind("on_duty2").str(), "on_duty2");
}

TEST(Handler, ParseAndPrint) {
    EXPECT_EQ(Handler::parse("counter"), Handler::counter());
    EXPECT_EQ(Handler::parse("classifier sleepnet"), Handler::classifier_named("sleepnet"));
    EXPECT_FALSE(Handler::parse("classifier"));
    EXPECT_FALSE(Handler::parse("tracker x"));
    EXPECT_EQ(Handler::classifier_named("fall").to_string(), "classifier fall");
    EXPECT_EQ(Handler::counter().to_string(), "counter");
}

TEST(Registry, DefaultTable) {
    const auto reg = default_registry();
    using F = BodyForm;
    EXPECT_EQ(reg.lookup("fall")->eligible_forms, (std::set<F>{F::Whole}));
    EXPECT_EQ(reg.lookup("sleep")->eligible_forms, (std::set<F>{F::Upper, F::Whole}));
    EXPECT_EQ(reg.lookup("on_duty")->eligible_forms, (std::set<F>{F::Part, F::Upper, F::Whole}));
    EXPECT_EQ(reg.lookup("jump")->eligible_forms, (std::set<F>{F::Whole}));
    EXPECT_EQ(reg.lookup("stand")->eligible_forms, (std::set<F>{F::Whole}));
    EXPECT_EQ(reg.lookup("sit")->eligible_forms, (std::set<F>{F::Upper}));
    EXPECT_EQ(reg.lookup("on_duty")->handler, Handler::counter());
    EXPECT_EQ(reg.lookup("unknown_action"), nullptr);
}

TEST(Registry, RejectsDuplicatesAndEmptyForms) {
    const RoutingRule a{ActionKind("a"), {BodyForm::Whole}, Handler::counter()};
    EXPECT_THROW(Registry({a, a}), PreconditionError);
    EXPECT_THROW(Registry({RoutingRule{ActionKind("b"), {}, Handler::counter()}}), PreconditionError);
}

TEST(Route, PartGoesOnlyToOnDuty) {
    const std::vector<Detection> in = {det(BodyForm::Part)};
    const auto out = route(in, default_registry());
    EXPECT_TRUE(out.at(ActionKind("fall")).empty());
    EXPECT_TRUE(out.at(ActionKind("sleep")).empty());
    EXPECT_EQ(out.at(ActionKind("on_duty")), in);
}

TEST(Route, WholeAndUpperSplitByAction) {
    const std::vector<Detection> in = {det(BodyForm::Whole, 0), det(BodyForm::Upper, 50)};
    const auto out = route(in, default_registry());
    EXPECT_EQ(out.at(ActionKind("sleep")), in);
    EXPECT_EQ(out.at(ActionKind("fall")), std::vector<Detection>{in[0]});
    EXPECT_EQ(out.at(ActionKind("sit")), std::vector<Detection>{in[1]});
}

TEST(Route, EmptyRegistryGivesEmptyMap) {
    const std::vector<Detection> in = {det(BodyForm::Whole)};
    EXPECT_TRUE(route(in, Registry{}).empty());
}

TEST(Route, PropertiesOnRandomInputs) {
    std::mt19937_64 rng(41);
    std::uniform_int_distribution<int> form(0, 2), n(0, 20);
    auto rules = default_registry().rules();
    for (int trial = 0; trial < 300; ++trial) {
        std::vector<Detection> in;
        const int k = n(rng);
        for (int i = 0; i < k; ++i) in.push_back(det(static_cast<BodyForm>(form(rng)), i * 20.0));
        const auto reg = default_registry();
        const auto out = route(in, reg);
        const auto idx = route_indices(in, reg);
        // Every detection reaches on_duty.
        EXPECT_EQ(out.at(ActionKind("on_duty")), in);
        for (const auto& rule : reg.rules()) {
            const auto& routed = out.at(rule.action);
            // Subsequence of the input holding exactly the eligible detections.
            std::vector<Detection> expected;
            std::copy_if(in.begin(), in.end(), std::back_inserter(expected),
                         [&](const Detection& d) { return rule.eligible_forms.contains(d.form); });
            EXPECT_EQ(routed, expected);
            const auto& ids = idx.at(rule.action);
            ASSERT_EQ(ids.size(), routed.size());
            for (std::size_t i = 0; i < ids.size(); ++i) {
                EXPECT_EQ(in[ids[i]], routed[i]);
                if (i > 0) {
                    EXPECT_LT(ids[i - 1], ids[i]);
                }
            }
        }
        // Rule order never changes any action's routed sequence.
        std::shuffle(rules.begin(), rules.end(), rng);
        EXPECT_EQ(route(in, Registry(rules)), out);
    }
}
