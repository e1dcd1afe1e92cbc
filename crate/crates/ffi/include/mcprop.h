#ifndef MCPROP_H
#define MCPROP_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum McpOp {
  MCP_OP_ADD = 0,
  MCP_OP_SUB = 1,
  MCP_OP_MUL = 2,
  MCP_OP_DIV = 3,
} McpOp;

typedef enum McpStatus {
  MCP_STATUS_OK = 0,
  MCP_STATUS_INVALID_ARGUMENT = 1,
  // A probability outside (0, 1).
  MCP_STATUS_DOMAIN = 2,
  // Quadrature failure, singular operand or degenerate basis.
  MCP_STATUS_NUMERICAL = 3,
  // A non-finite value while propagating.
  MCP_STATUS_PROPAGATION = 4,
  MCP_STATUS_IO = 5,
  MCP_STATUS_NULL_POINTER = 6,
  // The caller's buffer is shorter than the result.
  MCP_STATUS_BUFFER_TOO_SMALL = 7,
  MCP_STATUS_PANIC = 8,
} McpStatus;

// Equal-mass Dirac mixture.
typedef struct McpDirac McpDirac;

// Seeded xoshiro256** generator.
typedef struct McpRng McpRng;

// Owned array of samples.
typedef struct McpSamples McpSamples;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the most recent failure on this thread, or null. The pointer
// stays valid until the next failing call on the same thread.
const char *mcp_last_error(void);

// Library version as a static NUL-terminated string.
const char *mcp_version(void);

struct McpRng *mcp_rng_new(uint64_t seed);

// # Safety
// `rng` must come from [`mcp_rng_new`] and not be used afterwards. Null is ignored.
void mcp_rng_free(struct McpRng *rng);

// Next uniform on the open unit interval.
//
// # Safety
// `rng` must be a live generator and `out` writable.
enum McpStatus mcp_rng_next_f64(struct McpRng *rng, double *out);

// # Safety
// `out` must be writable.
enum McpStatus mcp_dirac_gaussian(double mean, double std_dev, uintptr_t r, struct McpDirac **out);

// # Safety
// `out` must be writable.
enum McpStatus mcp_dirac_uniform(double lower, double upper, uintptr_t r, struct McpDirac **out);

// Gaussian mixture from three parallel arrays of length `len`.
//
// # Safety
// The arrays must hold `len` readable values and `out` must be writable.
enum McpStatus mcp_dirac_mixture(const double *weights,
                                 const double *means,
                                 const double *std_devs,
                                 uintptr_t len,
                                 uintptr_t r,
                                 struct McpDirac **out);

// Mixture from explicit atoms, sorted by position with masses summing to 1.
//
// # Safety
// The arrays must hold `len` readable values and `out` must be writable.
enum McpStatus mcp_dirac_from_atoms(const double *positions,
                                    const double *masses,
                                    uintptr_t len,
                                    struct McpDirac **out);

// Distribution of `a op b` for independent operands, requantized to `r` atoms.
//
// # Safety
// `a` and `b` must be live mixtures and `out` writable.
enum McpStatus mcp_dirac_combine(const struct McpDirac *a,
                                 const struct McpDirac *b,
                                 enum McpOp op,
                                 uintptr_t r,
                                 struct McpDirac **out);

// # Safety
// `d` must be a live mixture and `out` writable.
enum McpStatus mcp_dirac_affine(const struct McpDirac *d,
                                double scale,
                                double offset,
                                struct McpDirac **out);

// # Safety
// `d` must be a live mixture and `out` writable.
enum McpStatus mcp_dirac_sigmoid(const struct McpDirac *d, struct McpDirac **out);

// Output of the named application (`convergence-challenge` or
// `poiseuille`) propagated with `r` atoms per input.
//
// # Safety
// `app` must be a NUL-terminated string and `out` writable.
enum McpStatus mcp_app_dirac_prop(const char *app, uintptr_t r, struct McpDirac **out);

// `n` Monte Carlo output samples of the named application.
//
// # Safety
// `app` must be a NUL-terminated string, `rng` live and `out` writable.
enum McpStatus mcp_app_monte_carlo(const char *app,
                                   struct McpRng *rng,
                                   uintptr_t n,
                                   struct McpSamples **out);

// # Safety
// `d` must come from this library and not be used afterwards. Null is ignored.
void mcp_dirac_free(struct McpDirac *d);

// Number of atoms, or 0 for null.
//
// # Safety
// `d` must be null or a live mixture.
uintptr_t mcp_dirac_len(const struct McpDirac *d);

// # Safety
// `d` must be a live mixture and `out` writable.
enum McpStatus mcp_dirac_mean(const struct McpDirac *d, double *out);

// Copies the atoms into two caller arrays of capacity `cap`.
//
// # Safety
// `positions` and `masses` must each have room for `cap` values.
enum McpStatus mcp_dirac_atoms(const struct McpDirac *d,
                               double *positions,
                               double *masses,
                               uintptr_t cap);

// Draws `n` samples from the mixture.
//
// # Safety
// `d` and `rng` must be live and `out` writable.
enum McpStatus mcp_dirac_sample(const struct McpDirac *d,
                                struct McpRng *rng,
                                uintptr_t n,
                                struct McpSamples **out);

// # Safety
// `s` must be null or live.
uintptr_t mcp_samples_len(const struct McpSamples *s);

// Pointer to the sample values, valid until `s` is freed.
//
// # Safety
// `s` must be null or live.
const double *mcp_samples_data(const struct McpSamples *s);

// # Safety
// `s` must come from this library and not be used afterwards. Null is ignored.
void mcp_samples_free(struct McpSamples *s);

// Wasserstein-1 distance between two empirical samples.
//
// # Safety
// `a` and `b` must hold `na` and `nb` readable values and `out` be writable.
enum McpStatus mcp_wasserstein1(const double *a,
                                uintptr_t na,
                                const double *b,
                                uintptr_t nb,
                                double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* MCPROP_H */
