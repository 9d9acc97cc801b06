#include <math.h>
#include <stdio.h>

#include "wproj.h"

#define CHECK(expr)                                                         \
    do {                                                                    \
        WprojStatus s_ = (expr);                                            \
        if (s_ != WPROJ_STATUS_OK) {                                        \
            fprintf(stderr, "%s: %s\n", #expr, wproj_status_message(s_));   \
            return 1;                                                       \
        }                                                                   \
    } while (0)

int main(void) {
    const double zero[] = {0.0}, one[] = {1.0};
    const double xs[] = {-0.25, 1.0}, ws[] = {0.5, 0.5};
    WprojMeasure *mu = NULL, *nu = NULL, *proj = NULL;
    double w = 0.0, x = 0.0, m = 0.0;
    size_t len = 0;

    CHECK(wproj_measure_new(zero, one, 1, &mu));
    CHECK(wproj_measure_new(xs, ws, 2, &nu));
    CHECK(wproj_wasserstein(mu, nu, 1.0, &w));
    CHECK(wproj_project_i(mu, nu, &proj));
    CHECK(wproj_measure_len(proj, &len));
    CHECK(wproj_measure_atoms(proj, &x, &m, 1));
    if (fabs(w - 0.625) > 1e-12 || len != 1 || fabs(x - 0.375) > 1e-12) {
        fprintf(stderr, "unexpected result: w=%g len=%zu x=%g\n", w, len, x);
        return 1;
    }
    if (wproj_measure_new(NULL, ws, 2, &mu) != WPROJ_STATUS_NULL_POINTER) {
        return 1;
    }

    wproj_measure_free(proj);
    wproj_measure_free(nu);
    wproj_measure_free(mu);
    puts("ok");
    return 0;
}
