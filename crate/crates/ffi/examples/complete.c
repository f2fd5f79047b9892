/* Recovers a rank-(1,1,1) 6x5x4 tensor from half of its entries. */
#include <stdio.h>
#include <stdlib.h>
#include <math.h>

#include "ihosvd.h"

static void check(IhosvdStatus st, const char *what) {
    if (st != IHOSVD_STATUS_OK) {
        const char *msg = ihosvd_last_error();
        fprintf(stderr, "%s: %s (%s)\n", what, ihosvd_status_str(st), msg ? msg : "");
        exit(1);
    }
}

int main(void) {
    size_t dims[3] = {6, 5, 4};
    double a[6] = {1, -2, 0.5, 3, 1.5, -1};
    double b[5] = {2, 1, -1, 0.5, 1};
    double c[4] = {1, 3, -0.5, 2};
    double full[120];
    size_t idx[120];
    double val[120];
    size_t n = 0;

    for (size_t k = 0; k < 4; k++)
        for (size_t j = 0; j < 5; j++)
            for (size_t i = 0; i < 6; i++) {
                size_t flat = i + 6 * (j + 5 * k);
                full[flat] = a[i] * b[j] * c[k];
                if ((flat * 37 + 11) % 100 < 50) {
                    idx[n] = flat;
                    val[n] = full[flat];
                    n++;
                }
            }

    IhosvdProblem *problem = NULL;
    check(ihosvd_problem_new(dims, 3, idx, val, n, &problem), "problem");

    IhosvdOptions opts = ihosvd_options_default();
    opts.tol = 1e-10;
    size_t ranks[3] = {1, 1, 1};
    IhosvdResult *result = NULL;
    check(ihosvd_solve(problem, IHOSVD_METHOD_IHOOI, ranks, NULL, 3, &opts, &result), "solve");

    double rec[120];
    check(ihosvd_result_reconstruct(result, rec, 120), "reconstruct");
    double num = 0, den = 0;
    for (size_t t = 0; t < 120; t++) {
        num += (rec[t] - full[t]) * (rec[t] - full[t]);
        den += full[t] * full[t];
    }
    size_t iters = 0;
    check(ihosvd_result_summary(result, &iters, NULL), "summary");
    printf("observed %zu of 120 entries, %zu iterations, relative error %.3e\n", n, iters, sqrt(num / den));

    ihosvd_result_free(result);
    ihosvd_problem_free(problem);
    return sqrt(num / den) < 1e-4 ? 0 : 2;
}
