#include <math.h>
#include <stdio.h>
#include "h2xh2.h"

int main(void) {
    H2Model *m = NULL;
    if (h2xh2_model_new(H2_MODEL_KIND_TAU, -2.0, &m) != H2_STATUS_OK) {
        fprintf(stderr, "%s\n", h2xh2_last_error());
        return 1;
    }
    double u[3] = {0.9, 0.0, 0.0};
    H2PointGeometry pg;
    if (h2xh2_point_geometry(m, u, &pg) != H2_STATUS_OK) return 2;
    double d[5];
    if (h2xh2_detq_derivatives(m, u, d) != H2_STATUS_OK) return 3;
    h2xh2_model_free(m);
    if (fabs(pg.lambdas[2] - sqrt(1.5)) > 1e-7) return 4;
    if (fabs(d[1] - (pg.rho + 3.0)) > 1e-12) return 5;
    if (h2xh2_model_new(H2_MODEL_KIND_ONE_ONE, 1.5, &m) != H2_STATUS_INVALID_ARGUMENT) return 6;
    printf("%s %.12f\n", h2xh2_version(), pg.lambdas[2]);
    return 0;
}
