#include <gtest/gtest.h>

#include "erag/embedding.hpp"
#include "erag/errors.hpp"
#include "support/oracles.hpp"

using namespace erag;

namespace {

double cos_of(const HashingEmbedder& e, const std::string& a, const std::string& b) {
  return dot(e.embed(a), e.embed(b));
}

}  // namespace

TEST(Embedding, DeterministicAndUnitLength) {
  HashingEmbedder e;
  const auto a = e.embed("egg");
  EXPECT_EQ(a, e.embed("egg"));
  EXPECT_EQ(a.dimension(), 256u);
  EXPECT_NEAR(dot(a, a), 1.0, 1e-12);
  EXPECT_NEAR(a.norm(), 1.0, 1e-12);
}

TEST(Embedding, MatchesReferenceTrigramHash) {
  HashingEmbedder e;
  for (const char* text : {"egg", "eggs", "zqx", "Stove  Burner", "counter top", "a"}) {
    const auto got = e.embed(text);
    const auto want = oracle::trigram_embed(text);
    ASSERT_EQ(got.values.size(), want.size());
    for (std::size_t i = 0; i < want.size(); ++i) EXPECT_DOUBLE_EQ(got.values[i], want[i]) << text;
  }
  EXPECT_NEAR(cos_of(e, "egg", "eggs"),
              oracle::cosine(oracle::trigram_embed("egg"), oracle::trigram_embed("eggs")), 1e-12);
  const double zqx = cos_of(e, "egg", "zqx");
  EXPECT_NEAR(zqx, oracle::cosine(oracle::trigram_embed("egg"), oracle::trigram_embed("zqx")), 1e-12);
  EXPECT_LT(zqx, 0.35);
  EXPECT_GT(cos_of(e, "egg", "eggs"), 0.35);
}

TEST(Embedding, NormalizesCaseAndWhitespace) {
  EXPECT_EQ(HashingEmbedder::padded_form("  Stove \t Burner "), " stove burner ");
  HashingEmbedder e;
  EXPECT_EQ(e.embed("STOVE burner"), e.embed("stove   burner"));
}

TEST(Embedding, RejectsEmptyTextAndFlagsBlankText) {
  HashingEmbedder e;
  EXPECT_THROW(e.embed(""), ValidationError);
  const auto blank = e.embed("   ");
  EXPECT_FALSE(blank.embeddable());
  EXPECT_TRUE(e.embed("x").embeddable());
}

TEST(Embedding, DotRejectsDimensionMismatch) {
  HashingEmbedder small(8);
  HashingEmbedder big;
  EXPECT_THROW(dot(small.embed("egg"), big.embed("egg")), ValidationError);
  EXPECT_THROW(HashingEmbedder(0), ValidationError);
}
