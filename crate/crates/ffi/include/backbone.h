#ifndef BACKBONE_H
#define BACKBONE_H

/* Generated by cbindgen from src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum BbStatus {
  BB_STATUS_OK = 0,
  BB_STATUS_NULL_POINTER = 1,
  BB_STATUS_INVALID_ARGUMENT = 2,
  BB_STATUS_INVALID_DISTRIBUTION = 3,
  BB_STATUS_INVALID_GRAPH = 4,
  BB_STATUS_DOMAIN = 5,
  BB_STATUS_OUTSIDE_SUPPORT = 6,
  BB_STATUS_KL_UNDEFINED = 7,
  BB_STATUS_TOO_LARGE = 8,
  BB_STATUS_PARSE = 9,
  BB_STATUS_IO = 10,
  BB_STATUS_PANIC = 11,
} BbStatus;

typedef enum BbAggregator {
  BB_AGGREGATOR_MIN = 0,
  BB_AGGREGATOR_MAX = 1,
  BB_AGGREGATOR_MEAN = 2,
} BbAggregator;

typedef enum BbStrategy {
  BB_STRATEGY_EXACT = 0,
  BB_STRATEGY_SAMPLED = 1,
  BB_STRATEGY_ANNEALED = 2,
} BbStrategy;

typedef struct BbDistribution BbDistribution;

typedef struct BbGraph BbGraph;

/*
 Result of a decomposition: per-scale synergy, partial atoms and, where
 defined, the winning failure set of each scale.
 */
typedef struct BbSpectrum BbSpectrum;

/*
 Decomposition settings. Fill with [`bb_config_default`] before editing.
 */
typedef struct BbConfig {
  enum BbAggregator aggregator;
  enum BbStrategy strategy;
  /*
   Failure sets drawn per scale under `BB_STRATEGY_SAMPLED`.
   */
  size_t num_samples;
  /*
   Initial annealing temperature; non-positive selects it automatically.
   */
  double initial_temp;
  double cooling;
  size_t steps_per_temp;
  size_t restarts;
  uint64_t seed;
  bool enforce_monotone;
} BbConfig;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Library version as a static NUL-terminated string.
 */
const char *bb_version(void);

/*
 Message for the most recent failure on this thread, or NULL. Valid until
 the next failing call on the same thread.
 */
const char *bb_last_error_message(void);

/*
 EXACT, MIN aggregator, seed 0 and the default annealing schedule.

 # Safety
 `out` must be NULL or point to writable memory for a `BbConfig`.
 */
enum BbStatus bb_config_default(struct BbConfig *out);

/*
 Builds a distribution from `num_states` rows of `num_vars` symbols
 (row-major in `states`) and their probabilities.

 # Safety
 `alphabet_sizes` must hold `num_vars` values, `states` `num_states *
 num_vars` values and `probs` `num_states` values. `out` must be writable.
 */
enum BbStatus bb_distribution_new(size_t num_vars,
                                  const uint32_t *alphabet_sizes,
                                  size_t num_states,
                                  const uint32_t *states,
                                  const double *probs,
                                  struct BbDistribution **out);

/*
 Parses the JSON distribution format.

 # Safety
 `json` must be a NUL-terminated string; `out` must be writable.
 */
enum BbStatus bb_distribution_from_json(const char *json, struct BbDistribution **out);

/*
 # Safety
 `d` must be NULL or a handle from this library not yet freed.
 */
void bb_distribution_free(struct BbDistribution *d);

/*
 Number of variables, or 0 for NULL.

 # Safety
 `d` must be NULL or a live handle.
 */
size_t bb_distribution_num_vars(const struct BbDistribution *d);

/*
 Number of states with positive probability, or 0 for NULL.

 # Safety
 `d` must be NULL or a live handle.
 */
size_t bb_distribution_support_size(const struct BbDistribution *d);

/*
 Builds a graph from parallel edge arrays.

 # Safety
 `u`, `v` and `w` must each hold `num_edges` values; `out` must be writable.
 */
enum BbStatus bb_graph_new(size_t num_nodes,
                           size_t num_edges,
                           const size_t *u,
                           const size_t *v,
                           const double *w,
                           bool directed,
                           struct BbGraph **out);

/*
 Parses a `u,v,w` edge list. `num_nodes` of 0 infers the node count.

 # Safety
 `csv` must be a NUL-terminated string; `out` must be writable.
 */
enum BbStatus bb_graph_from_csv(const char *csv,
                                size_t num_nodes,
                                bool directed,
                                struct BbGraph **out);

/*
 # Safety
 `g` must be NULL or a handle from this library not yet freed.
 */
void bb_graph_free(struct BbGraph *g);

/*
 Mean off-diagonal communicability of the whole graph.

 # Safety
 `g` must be a live handle and `out` writable.
 */
enum BbStatus bb_communicability(const struct BbGraph *g, double *out);

/*
 Entropy backbone of one state, or the expected backbone when `state` is
 NULL.

 # Safety
 `d` and `config` must be live; `state` NULL or `num_vars` symbols; `out`
 writable.
 */
enum BbStatus bb_entropy_backbone(const struct BbDistribution *d,
                                  const uint32_t *state,
                                  const struct BbConfig *config,
                                  struct BbSpectrum **out);

/*
 Negentropy backbone of one state, or in expectation when `state` is NULL.

 # Safety
 As for [`bb_entropy_backbone`].
 */
enum BbStatus bb_negentropy_backbone(const struct BbDistribution *d,
                                     const uint32_t *state,
                                     const struct BbConfig *config,
                                     struct BbSpectrum **out);

/*
 Total-correlation backbone of one state, or in expectation when `state`
 is NULL.

 # Safety
 As for [`bb_entropy_backbone`].
 */
enum BbStatus bb_total_correlation_backbone(const struct BbDistribution *d,
                                            const uint32_t *state,
                                            const struct BbConfig *config,
                                            struct BbSpectrum **out);

/*
 Backbone of `KL(posterior || prior)`, per state when `state` is non-NULL.

 # Safety
 As for [`bb_entropy_backbone`], with both distributions live.
 */
enum BbStatus bb_kl_backbone(const struct BbDistribution *posterior,
                             const struct BbDistribution *prior,
                             const uint32_t *state,
                             const struct BbConfig *config,
                             struct BbSpectrum **out);

/*
 Mutual-information backbone between variable `target` and the rest:
 `k` atoms when `joint` is true, `k - 1` otherwise.

 # Safety
 `d`, `config` live; `out` writable.
 */
enum BbStatus bb_mi_backbone(const struct BbDistribution *d,
                             size_t target,
                             bool joint,
                             const struct BbConfig *config,
                             struct BbSpectrum **out);

/*
 Communicability backbone under edge failures.

 # Safety
 `g`, `config` live; `out` writable.
 */
enum BbStatus bb_structural_backbone(const struct BbGraph *g,
                                     const struct BbConfig *config,
                                     struct BbSpectrum **out);

/*
 Number of scales, or 0 for NULL.

 # Safety
 `s` must be NULL or a live handle.
 */
size_t bb_spectrum_len(const struct BbSpectrum *s);

/*
 Copies the α-synergy values (α = 1..len) into `buf`.

 # Safety
 `s` live; `buf` writable for `len` doubles.
 */
enum BbStatus bb_spectrum_synergy(const struct BbSpectrum *s, double *buf, size_t len);

/*
 Copies the partial atoms into `buf`.

 # Safety
 `s` live; `buf` writable for `len` doubles.
 */
enum BbStatus bb_spectrum_atoms(const struct BbSpectrum *s, double *buf, size_t len);

/*
 Total of the decomposed measure: the sum of atoms for set-function
 backbones, the directly computed divergence for divergence backbones.

 # Safety
 `s` live; `out` writable.
 */
enum BbStatus bb_spectrum_total(const struct BbSpectrum *s, double *out);

/*
 Bitmask of the failure set that realised scale `alpha` (1-based). Fails
 with `BB_STATUS_INVALID_ARGUMENT` when no single winner exists (MEAN
 aggregator, averaged or divergence spectra).

 # Safety
 `s` live; `out` writable.
 */
enum BbStatus bb_spectrum_winner(const struct BbSpectrum *s, size_t alpha, uint64_t *out);

/*
 Number of scales flagged by the monotonicity check.

 # Safety
 `s` must be NULL or a live handle.
 */
size_t bb_spectrum_violation_count(const struct BbSpectrum *s);

/*
 Whether a running-maximum repair changed the spectrum.

 # Safety
 `s` must be NULL or a live handle.
 */
bool bb_spectrum_repaired(const struct BbSpectrum *s);

/*
 # Safety
 `s` must be NULL or a handle from this library not yet freed.
 */
void bb_spectrum_free(struct BbSpectrum *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* BACKBONE_H */
