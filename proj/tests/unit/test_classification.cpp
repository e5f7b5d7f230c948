#include <algorithm>
#include <numeric>
#include <random>

#include <gtest/gtest.h>

#include "mfhar/classification.hpp"
#include "mfhar/error.hpp"

using namespace mfhar;

namespace {

LabelSet sleep_set() { return LabelSet({"sleep", "sit", "nosleep"}, {"sleep"}); }
LabelSet fall_set() { return LabelSet({"fall", "sit_on_furniture", "other"}, {"fall"}); }

Image canvas(std::uint8_t fill = 114) {
    return Image::filled(int(kClassifierCanvas.w), int(kClassifierCanvas.h), fill);
}

std::vector<double> random_dist(std::mt19937_64& rng, std::size_t k) {
    std::uniform_real_distribution<double> u(0.001, 1.0);
    std::vector<double> p(k);
    for (auto& v : p) v = u(rng);
    const double s = std::accumulate(p.begin(), p.end(), 0.0);
    for (auto& v : p) v /= s;
    return p;
}

}  // namespace

TEST(LabelSet, Validation) {
    EXPECT_THROW(LabelSet({"a", "a"}, {"a"}), PreconditionError);
    EXPECT_THROW(LabelSet({"a", "b"}, {}), PreconditionError);
    EXPECT_THROW(LabelSet({"a", "b"}, {"c"}), PreconditionError);
    EXPECT_EQ(sleep_set().index_of("nosleep"), 2u);
}

TEST(LabelSet, ShippedDefaults) {
    EXPECT_EQ(default_label_set("sleep"), sleep_set());
    EXPECT_EQ(default_label_set("fall"), fall_set());
    EXPECT_EQ(default_label_set("jump"), LabelSet({"jump", "other"}, {"jump"}));
    EXPECT_EQ(default_label_set("stand"), LabelSet({"stand", "other"}, {"stand"}));
    EXPECT_FALSE(default_label_set("run"));
}

TEST(ClassDistribution, Validation) {
    EXPECT_THROW(ClassDistribution({0.5, 0.3}), PreconditionError);
    EXPECT_THROW(ClassDistribution({1.2, -0.2}), PreconditionError);
    EXPECT_THROW(ClassDistribution(std::vector<double>{}), PreconditionError);
    EXPECT_NO_THROW(ClassDistribution({0.5, 0.5000005}));
    EXPECT_EQ(ClassDistribution::one_hot(3, 1).probabilities(), (std::vector<double>{0, 1, 0}));
}

TEST(Collapse, SleepExample) {
    const auto c = collapse(ClassDistribution({0.7, 0.2, 0.1}), sleep_set());
    EXPECT_TRUE(c.positive);
    EXPECT_DOUBLE_EQ(c.score, 0.7);
    EXPECT_EQ(c.top_label, "sleep");
}

TEST(Collapse, OneHotNegative) {
    const auto c = collapse(ClassDistribution::one_hot(3, 2), sleep_set());
    EXPECT_FALSE(c.positive);
    EXPECT_EQ(c.score, 0.0);
    EXPECT_EQ(c.top_label, "nosleep");
}

TEST(Collapse, NarrowFallWin) {
    const auto c = collapse(ClassDistribution({0.34, 0.33, 0.33}), fall_set());
    EXPECT_TRUE(c.positive);
    EXPECT_DOUBLE_EQ(c.score, 0.34);
}

TEST(Collapse, ExactTiePicksEarliestLabel) {
    const auto c = collapse(ClassDistribution({0.4, 0.4, 0.2}), LabelSet({"x", "y", "z"}, {"y"}));
    EXPECT_EQ(c.top_label, "x");
    EXPECT_FALSE(c.positive);
}

TEST(Collapse, MassThresholdOverridesArgmax) {
    const LabelSet set({"a", "b", "c"}, {"a", "b"});
    const ClassDistribution d({0.3, 0.3, 0.4});
    EXPECT_FALSE(collapse(d, set).positive);
    EXPECT_TRUE(collapse(d, set, 0.5).positive);
    EXPECT_FALSE(collapse(d, set, 0.7).positive);
}

TEST(Collapse, SizeMismatchIsPrecondition) {
    EXPECT_THROW(collapse(ClassDistribution({0.5, 0.5}), sleep_set()), PreconditionError);
}

TEST(Collapse, PropertiesOnRandomDistributions) {
    std::mt19937_64 rng(51);
    const std::vector<std::string> names = {"a", "b", "c", "d", "e"};
    for (int trial = 0; trial < 1000; ++trial) {
        const auto p = random_dist(rng, names.size());
        std::set<std::string> pos;
        for (const auto& n : names) {
            if (rng() % 2) pos.insert(n);
        }
        if (pos.empty()) pos.insert("c");
        const LabelSet set(names, pos);
        const auto c = collapse(ClassDistribution(p), set);

        double mass = 0;
        for (std::size_t i = 0; i < p.size(); ++i) {
            if (pos.contains(names[i])) mass += p[i];
        }
        EXPECT_EQ(c.score, std::clamp(mass, 0.0, 1.0));
        const auto top = std::max_element(p.begin(), p.end()) - p.begin();
        EXPECT_EQ(c.top_label, names[top]);
        EXPECT_EQ(c.positive, pos.contains(names[top]));

        // Order-preserving remaps (here a softmax of scaled log-probs) keep the verdict.
        std::vector<double> logits(p.size());
        std::transform(p.begin(), p.end(), logits.begin(), [](double v) { return 3.0 * std::log(v); });
        const auto sharp = collapse(ClassDistribution(softmax(logits)), set);
        EXPECT_EQ(sharp.top_label, c.top_label);
        EXPECT_EQ(sharp.positive, c.positive);

        // Permuting the label set with aligned probabilities keeps the verdict.
        std::vector<std::size_t> perm(names.size());
        std::iota(perm.begin(), perm.end(), 0);
        std::shuffle(perm.begin(), perm.end(), rng);
        std::vector<std::string> pn;
        std::vector<double> pp;
        for (auto i : perm) {
            pn.push_back(names[i]);
            pp.push_back(p[i]);
        }
        const auto permuted = collapse(ClassDistribution(pp), LabelSet(pn, pos));
        EXPECT_EQ(permuted.positive, c.positive);
        EXPECT_EQ(permuted.top_label, c.top_label);
        EXPECT_NEAR(permuted.score, c.score, 1e-12);
    }
}

TEST(Softmax, StableOnLargeLogits) {
    const std::vector<double> logits = {1000, 1000, 999};
    const auto p = softmax(logits);
    EXPECT_NEAR(p[0], p[1], 1e-15);
    EXPECT_NEAR(std::accumulate(p.begin(), p.end(), 0.0), 1.0, 1e-12);
    EXPECT_TRUE(softmax({}).empty());
}

TEST(ScriptedClassifier, PositionKeyAndDefaults) {
    auto clf = ScriptedClassifier::parse("labels: sleep,sit,nosleep\n0 0 0.7 0.2 0.1\n", sleep_set());
    const auto img = canvas();
    EXPECT_EQ(clf.classify({img, 0, 0}), ClassDistribution({0.7, 0.2, 0.1}));
    EXPECT_EQ(clf.classify({img, 0, 1}), ClassDistribution::uniform(3));
    auto nosleep = ScriptedClassifier::parse("labels: sleep,sit,nosleep\n", sleep_set(), "onehot:nosleep");
    EXPECT_EQ(nosleep.classify({img, 4, 0}), ClassDistribution::one_hot(3, 2));
    EXPECT_THROW(ScriptedClassifier::parse("labels: sleep,sit,nosleep\n", sleep_set(), "onehot:x"),
                 PreconditionError);
}

TEST(ScriptedClassifier, HeaderReordersColumns) {
    auto clf = ScriptedClassifier::parse("labels: nosleep,sleep,sit\n2 1 0.1 0.7 0.2\n", sleep_set());
    EXPECT_EQ(clf.classify({canvas(), 2, 1}), ClassDistribution({0.7, 0.2, 0.1}));
}

TEST(ScriptedClassifier, HashKeyWins) {
    const auto img = canvas(7);
    char hex[32];
    std::snprintf(hex, sizeof hex, "%llx", static_cast<unsigned long long>(img.content_hash()));
    const std::string text = std::string("labels: sleep,sit,nosleep\n@") + hex + " 0 1 0\n0 0 1 0 0\n";
    auto clf = ScriptedClassifier::parse(text, sleep_set());
    EXPECT_EQ(clf.classify({img, 0, 0}), ClassDistribution::one_hot(3, 1));
    EXPECT_EQ(clf.classify({canvas(8), 0, 0}), ClassDistribution::one_hot(3, 0));
    // Same crop twice, same answer.
    EXPECT_EQ(clf.classify({img, 9, 9}), clf.classify({img, 9, 9}));
}

TEST(ScriptedClassifier, ParseErrors) {
    auto where = [](const std::string& text) {
        try {
            ScriptedClassifier::parse(text, sleep_set());
        } catch (const ParseError& e) {
            return e.where();
        }
        return std::string("none");
    };
    EXPECT_EQ(where("labels: sleep,sit,nosleep\n0 0 0.5 0.2 0.1\n"), "line 2");  // sums to 0.8
    EXPECT_EQ(where("0 0 0.7 0.2 0.1\n"), "line 1");                          // no header
    EXPECT_EQ(where("labels: sleep,sit\n"), "line 1");
    EXPECT_EQ(where("labels: sleep,sit,run\n"), "line 1");
    EXPECT_EQ(where("labels: sleep,sit,nosleep\n0 0 0.7 0.3\n"), "line 2");
    EXPECT_EQ(where("labels: sleep,sit,nosleep\n-1 0 0.7 0.2 0.1\n"), "line 2");
    EXPECT_EQ(where("labels: sleep,sit,nosleep\n@zz 0.7 0.2 0.1\n"), "line 2");
}

TEST(Classifier, WrongCanvasIsPrecondition) {
    auto clf = ScriptedClassifier::parse("labels: sleep,sit,nosleep\n", sleep_set());
    const auto wrong = Image::filled(384, 128, 0);
    EXPECT_THROW(clf.classify({wrong, 0, 0}), PreconditionError);
}

TEST(InterpretHead, ProbabilitiesPassLogitsAreSoftmaxed) {
    const std::vector<float> probs = {0.2f, 0.3f, 0.5f};
    const auto d = NetworkClassifier::interpret_head(probs, 3);
    EXPECT_NEAR(d.probabilities()[2], 0.5, 1e-6);
    const std::vector<float> logits = {2.0f, -1.0f, 0.5f};
    const auto l = NetworkClassifier::interpret_head(logits, 3);
    const std::vector<double> dl(logits.begin(), logits.end());
    const auto expected = softmax(dl);
    for (std::size_t i = 0; i < 3; ++i) EXPECT_NEAR(l.probabilities()[i], expected[i], 1e-12);
    try {
        NetworkClassifier::interpret_head(std::vector<float>(5, 0.2f), 3);
        FAIL();
    } catch (const ShapeMismatchError& e) {
        EXPECT_NE(std::string(e.what()).find('5'), std::string::npos);
        EXPECT_NE(std::string(e.what()).find('3'), std::string::npos);
    }
}
