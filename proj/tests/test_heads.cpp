// Copyright 2026 The lxlab Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <algorithm>
#include <set>

#include "doctest.h"
#include "lxlab/heads.hpp"
#include "lxlab/synth.hpp"
#include "support/gradcheck.hpp"

using namespace lxlab;

namespace {

const UnigramVocab& vocab() {
  static const UnigramVocab v = UnigramVocab::load(std::filesystem::path(LXLAB_DATA_DIR) / "vocab.tsv");
  return v;
}

Document form(std::uint64_t seed, const std::string& lang = "en") {
  static const Lexicon lex = load_lexicon(default_lexicon_path());
  return synth_datasets(lex, {lang}, 1, seed)[0].documents[0];
}

struct Fixture {
  Document doc;
  std::vector<SubwordToken> tokens;
  ModelConfig mc;
  EncodedBatch batch;
  ParamStore store;

  explicit Fixture(std::uint64_t seed, double init = 0.02) : doc(form(seed)), tokens(tokenize_document(doc, vocab())) {
    mc = ModelConfig::preset(Preset::kTiny, vocab().size());
    mc.init_scale = init;
    SampleInput in;
    for (const auto& t : tokens) {
      in.token_ids.push_back(t.piece_id);
      in.boxes.push_back(t.box);
    }
    in.raster = *doc.raster;
    batch = build_batch({in}, mc, vocab().specials());
    Rng rng(seed);
    init_ser_head(store, mc, rng);
    init_re_head(store, mc, rng);
  }

  Tensor random_hidden(Rng& rng) const {
    Tensor h({static_cast<std::size_t>(batch.seq_len), static_cast<std::size_t>(mc.hidden)});
    for (auto& v : h.data()) v = rng.uniform(-1, 1);
    return h;
  }
};

std::vector<int> token_words(const std::vector<SubwordToken>& t) {
  std::vector<int> w;
  for (const auto& x : t) w.push_back(x.word_index);
  return w;
}

}  // namespace

TEST_CASE("ser forced logits reproduce gold spans") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const Document doc = form(seed, seed % 2 ? "zh" : "de");
    const auto toks = tokenize_document(doc, vocab());
    const auto tags = bio_encode(doc, token_words(toks));
    Tensor logits({toks.size(), kNumBioLabels});
    for (std::size_t i = 0; i < toks.size(); ++i) logits.at(i, tags[i]) = 1.0;
    const auto pred = ser_predict(logits, toks, doc.words.size());
    std::vector<EntitySpan> gold;
    for (const auto& e : doc.entities) {
      if (e.label != EntityLabel::kOther) gold.push_back(e);
    }
    REQUIRE(pred.size() == gold.size());
    for (std::size_t k = 0; k < gold.size(); ++k) CHECK(pred[k].same_span(gold[k]));

    Tensor all_o({toks.size(), kNumBioLabels});
    for (std::size_t i = 0; i < toks.size(); ++i) all_o.at(i, 0) = 5.0;
    CHECK(ser_predict(all_o, toks, doc.words.size()).empty());
  }
}

TEST_CASE("ser reads only text positions") {
  Fixture f(3);
  Rng rng(1);
  Tensor h = f.random_hidden(rng);
  const auto rows = text_rows(f.batch, 0);
  CHECK(rows.front() == 1 + f.batch.visual);
  CHECK(rows.size() == f.tokens.size());
  Tape t1;
  const Tensor a = ser_logits(t1, f.store, t1.constant(h), rows).value();
  for (int p = 0; p <= f.batch.visual; ++p) {
    for (auto& v : h.row(p)) v += 100.0;
  }
  Tape t2;
  CHECK(ser_logits(t2, f.store, t2.constant(h), rows).value() == a);
}

TEST_CASE("re_candidates enumerates ordered pairs") {
  CHECK(re_candidates(3).size() == 6u);
  CHECK(re_candidates(1).empty());
  CHECK(re_candidates(0).empty());
  for (int n = 2; n < 12; ++n) {
    const auto pairs = re_candidates(n);
    CHECK(pairs.size() == static_cast<std::size_t>(n * (n - 1)));
    std::set<std::pair<int, int>> uniq(pairs.begin(), pairs.end());
    CHECK(uniq.size() == pairs.size());
    CHECK(std::none_of(pairs.begin(), pairs.end(), [](auto p) { return p.first == p.second; }));
  }
}

TEST_CASE("re scorer zero and linear cases") {
  Fixture f(5);
  Rng rng(2);
  const Tensor h = f.random_hidden(rng);
  const auto ents = re_entities(f.doc, f.tokens, f.batch, 0);
  REQUIRE(ents.size() == f.doc.entities.size());
  const auto pairs = re_candidates(static_cast<int>(ents.size()));
  f.store.get("re.bilinear").value.fill(0.0);
  f.store.get("re.linear.weight").value.fill(0.0);
  {
    Tape tape;
    const Tensor z = re_logits(tape, f.store, tape.constant(h), ents, pairs).value();
    CHECK(std::all_of(z.data().begin(), z.data().end(), [](double v) { return v == 0.0; }));
  }
  for (auto& v : f.store.get("re.linear.weight").value.data()) v = rng.uniform(-1, 1);
  Tape t1;
  const Tensor once = re_logits(t1, f.store, t1.constant(h), ents, pairs).value();
  for (auto& v : f.store.get("re.linear.weight").value.data()) v *= 2.0;
  Tape t2;
  const Tensor twice = re_logits(t2, f.store, t2.constant(h), ents, pairs).value();
  for (std::size_t i = 0; i < once.size(); ++i) CHECK(twice[i] == doctest::Approx(2.0 * once[i]).epsilon(1e-14));
}

TEST_CASE("re forced logits reproduce gold links") {
  Fixture f(7);
  const auto ents = re_entities(f.doc, f.tokens, f.batch, 0);
  const auto pairs = re_candidates(static_cast<int>(ents.size()));
  const auto targets = re_targets(f.doc, ents, pairs);
  CHECK(std::count(targets.begin(), targets.end(), kKeyValueClass) == static_cast<long>(f.doc.links.size()));
  Tensor forced({pairs.size(), 2});
  for (std::size_t p = 0; p < pairs.size(); ++p) forced.at(p, targets[p]) = 1.0;
  auto links = re_predict(forced, ents, pairs);
  auto gold = f.doc.links;
  auto key = [](const RelationLink& l) { return std::pair{l.head, l.tail}; };
  std::sort(links.begin(), links.end(), [&](auto& a, auto& b) { return key(a) < key(b); });
  std::sort(gold.begin(), gold.end(), [&](auto& a, auto& b) { return key(a) < key(b); });
  CHECK(links == gold);
  Tensor none({pairs.size(), 2});
  for (std::size_t p = 0; p < pairs.size(); ++p) none.at(p, kNoRelation) = 1.0;
  CHECK(re_predict(none, ents, pairs).empty());
}

TEST_CASE("ser and re head gradients match finite differences") {
  Fixture f(9, 0.3);
  Rng rng(4);
  const Tensor h0 = f.random_hidden(rng);
  const auto ents = re_entities(f.doc, f.tokens, f.batch, 0);
  const auto pairs = re_candidates(static_cast<int>(ents.size()));
  const auto targets = re_targets(f.doc, ents, pairs);
  const auto rows = text_rows(f.batch, 0);
  const auto tags = bio_encode(f.doc, token_words(f.tokens));
  Tensor h = h0;
  auto build = [&](Tape& tape, Var hv) {
    Var ser = ops::cross_entropy(ser_logits(tape, f.store, hv, rows), tags, kIgnoreIndex);
    Var re = ops::cross_entropy(re_logits(tape, f.store, hv, ents, pairs), targets, kIgnoreIndex);
    return ops::add(ser, re);
  };
  auto loss = [&] {
    Tape tape;
    return build(tape, tape.constant(h)).value().item();
  };
  f.store.zero_grad();
  Tape tape;
  Var hv = tape.variable(h);
  tape.backward(build(tape, hv));
  CHECK(lxlab::testing::relative_error(tape.grad(hv), lxlab::testing::numeric_gradient(loss, h)) <= 1e-6);
  for (Param* p : f.store.all()) {
    INFO(p->name);
    const Tensor numeric = lxlab::testing::numeric_gradient(loss, p->value);
    CHECK(lxlab::testing::relative_error(p->grad, numeric) <= 1e-6);
  }
}
