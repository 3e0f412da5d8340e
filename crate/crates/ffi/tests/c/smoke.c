#include <math.h>
#include <stdio.h>
#include "nlo_quanta.h"

#define CHECK(call) do { NqStatus s_ = (call); if (s_ != NQ_STATUS_OK) { \
    char buf[256]; size_t n; nq_last_error(buf, sizeof buf, &n); \
    fprintf(stderr, "%s failed (%d): %s\n", #call, (int)s_, buf); return 1; } } while (0)

int main(void) {
    size_t dims[1] = {40};
    NqSpace *space = NULL;
    CHECK(nq_space_new(dims, 1, &space));
    double re[1] = {1.5}, im[1] = {0.0};
    NqState *st = NULL;
    CHECK(nq_state_coherent(space, re, im, 1, &st));
    NqModel *kerr = NULL;
    CHECK(nq_model_kerr(space, 0.0, 1.0, &kerr));
    NqState *out = NULL;
    CHECK(nq_evolve(kerr, st, 0.3, &out));
    double n = 0.0, q = 0.0;
    CHECK(nq_state_mean_number(out, 0, &n));
    CHECK(nq_state_mandel_excess(out, 0, &q));
    if (fabs(n - 2.25) > 1e-9 || fabs(q) > 1e-8) return 2;

    double u = 0.0, v = 0.0;
    CHECK(nq_max_squeezing(1e4, &u, &v));
    if (fabs(v - 1.25e-3) > 1e-15) return 3;

    size_t bad[1] = {0};
    NqSpace *none = NULL;
    if (nq_space_new(bad, 1, &none) != NQ_STATUS_INVALID_ARGUMENT) return 4;

    nq_state_free(out);
    nq_state_free(st);
    nq_model_free(kerr);
    nq_space_free(space);
    printf("ok\n");
    return 0;
}
