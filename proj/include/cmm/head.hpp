#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <vector>

#include "cmm/matrix.hpp"
#include "cmm/scenario.hpp"

namespace cmm {

// Frozen cosine-similarity classifier with temperature softmax. Rows of the
// embedding matrix are unit-normalized class embeddings; the head is never
// touched by the optimizer.
class FrozenHead {
public:
    FrozenHead(Matrix embeddings, std::vector<int> class_ids, double temperature);

    // Per-class unit embeddings drawn deterministically per class id, so any
    // subset of classes yields the same rows regardless of which run drew them.
    static FrozenHead seeded(const std::vector<int>& class_ids, std::size_t embed_dim,
                             double temperature, std::uint64_t seed);

    FrozenHead subset(const std::vector<int>& class_ids) const;

    // Softmax over cosine similarities; each output row sums to 1.
    Matrix class_probabilities(const Matrix& z) const;

    struct LossResult {
        double loss = 0.0;
        Matrix dz; // gradient of the mean cross-entropy w.r.t. z
    };
    // Mean cross-entropy of the head's probabilities, labels given as class ids.
    LossResult cross_entropy(const Matrix& z, const std::vector<int>& labels) const;
    double mean_cross_entropy(const Matrix& z, const std::vector<int>& labels) const;

    std::size_t num_classes() const { return class_ids_.size(); }
    std::size_t embed_dim() const { return embeddings_.cols(); }
    double temperature() const { return temperature_; }
    const std::vector<int>& class_ids() const { return class_ids_; }
    const Matrix& embeddings() const { return embeddings_; }

private:
    std::size_t row_of(int class_id) const;

    Matrix embeddings_; // num_classes x embed_dim, unit rows
    std::vector<int> class_ids_;
    double temperature_;
};

// Mean-class embeddings for nearest-mean classification. In CIL a class's
// prototype is written once and immutable afterwards; in DIL reappearing
// classes update a count-weighted running mean.
class PrototypeStore {
public:
    explicit PrototypeStore(Scenario scenario) : scenario_(scenario) {}

    // Accumulate class means from one task's embeddings.
    void update(const Matrix& z, const std::vector<int>& labels, int task_index);

    bool empty() const { return entries_.empty(); }
    std::size_t size() const { return entries_.size(); }
    bool has_class(int class_id) const { return entries_.count(class_id) != 0; }
    // Unit-normalized prototype.
    std::vector<double> prototype(int class_id) const;
    double sample_count(int class_id) const;
    int provenance(int class_id) const;
    std::vector<int> class_ids() const;
    Scenario scenario() const { return scenario_; }

    // Used by checkpoint loading to restore raw state.
    void restore(int class_id, std::vector<double> mean, double count, int task_index);

private:
    struct Entry {
        std::vector<double> mean; // running mean of raw embeddings
        double count = 0.0;
        int task = 0;
    };
    std::map<int, Entry> entries_;
    Scenario scenario_;
};

// Nearest-mean classification by cosine similarity; ties resolve to the
// smallest class id.
std::vector<int> predict_nmc(const Matrix& z, const PrototypeStore& store);

} // namespace cmm
