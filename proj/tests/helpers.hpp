#pragma once

#include <string>
#include <vector>

#include "abcd/dataset.hpp"
#include "abcd/rng.hpp"

namespace abcd::test {

// Binary-anchor dataset from parallel vectors; outcome named "y".
inline ExperimentDataset make_binary_dataset(const std::vector<double>& anchors,
                                             const std::vector<double>& beliefs,
                                             const std::vector<double>& outcomes) {
    ExperimentDataset ds;
    ds.schema.outcomes["y"] = OutcomeSchema{};
    for (std::size_t i = 0; i < beliefs.size(); ++i) {
        ParticipantRecord rec;
        rec.id = "p" + std::to_string(i);
        rec.condition = AnchorCondition::anchor(anchors[i]);
        rec.belief = beliefs[i];
        if (i < outcomes.size()) rec.outcomes["y"] = outcomes[i];
        ds.records.push_back(std::move(rec));
    }
    return ds;
}

// Random dataset with a real first stage: belief responds to the anchor, the
// outcome responds to the belief. Always has both anchor groups populated.
inline ExperimentDataset random_binary_dataset(Rng& rng, int n) {
    std::vector<double> anchors, beliefs, outcomes;
    for (int i = 0; i < n; ++i) {
        const bool high = i < 2 ? (i == 1) : rng.uniform() < 0.5;
        const double anchor = high ? 80.0 : 20.0;
        const double belief = 40.0 + 0.4 * (anchor - 40.0) + 5.0 * rng.normal();
        const double outcome = 1.5 + 0.7 * belief + 2.0 * rng.normal();
        anchors.push_back(anchor);
        beliefs.push_back(belief);
        outcomes.push_back(outcome);
    }
    return make_binary_dataset(anchors, beliefs, outcomes);
}

}  // namespace abcd::test
