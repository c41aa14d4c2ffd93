#pragma once

#include <cstdint>

#include "editsql/corpus.hpp"

namespace editsql {

// Programmatic toy corpora over two small schemas, used by cmd-gradcheck,
// the test suites, and the training sanity checks.
struct SyntheticCorpus {
  SchemaMap schemas;
  std::vector<Interaction> train;
  std::vector<Interaction> dev;
};

// Two toy schemas; interactions whose utterances fully determine the query.
SyntheticCorpus make_overfit_corpus(std::uint64_t seed,
                                    std::size_t num_interactions = 20);

// Interactions whose consecutive gold queries share >= 70% of their tokens;
// follow-up utterances mention only the delta, so the previous query is the
// main evidence for the shared part. Dev interactions use column
// combinations unseen in training.
SyntheticCorpus make_editing_corpus(std::uint64_t seed, std::size_t num_train,
                                    std::size_t num_dev);

// Minimal two-turn interaction (editing active at turn 2) for gradient
// verification.
SyntheticCorpus make_gradcheck_fixture();

}  // namespace editsql
