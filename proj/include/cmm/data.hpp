#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cmm/matrix.hpp"
#include "cmm/scenario.hpp"

namespace cmm {

struct SplitData {
    Matrix x;           // samples x input_dim
    std::vector<int> y; // class ids, parallel to rows of x
};

struct TaskDataset {
    SplitData train;
    SplitData test;
    std::vector<int> classes; // ordered, ascending

    void validate() const; // every label known, every class in both splits
};

struct TaskSequence {
    Scenario scenario = Scenario::cil;
    std::vector<TaskDataset> tasks;
    std::vector<int> global_classes; // ordered, ascending

    void validate() const; // scenario invariants (disjoint / shared label space)
    std::size_t input_dim() const;
};

// Gaussian-blob CIL sequence: classes partitioned sequentially into tasks,
// seeded class means on a sphere, isotropic noise with std = spread, 80/20
// stratified train/test split. Deterministic given the seed.
TaskSequence gen_cil(std::uint64_t seed, std::size_t num_tasks,
                     std::size_t classes_per_task, std::size_t samples_per_class,
                     std::size_t input_dim, double spread);

// DIL sequence: shared class means; each domain transforms its samples by a
// seeded rotation plus translation, both scaled by domain_shift (identity at
// shift 0). All domains share the label space.
TaskSequence gen_dil(std::uint64_t seed, std::size_t num_domains,
                     std::size_t num_classes, std::size_t samples_per_class,
                     std::size_t input_dim, double spread, double domain_shift);

// The per-domain rotation used by gen_dil; exposed for verification.
Matrix dil_rotation(std::uint64_t seed, std::size_t domain, std::size_t dim,
                    double domain_shift);

// CSV format: header `task,split,label,f0,...,f{d-1}`, one sample per row.
TaskSequence load_csv(const std::string& path, Scenario scenario);
void save_csv(const TaskSequence& seq, const std::string& path);

} // namespace cmm
