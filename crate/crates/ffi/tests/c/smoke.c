#include <stdio.h>
#include "poisson3.h"

int main(void) {
    P3Structure *s = NULL;
    P3Chart *chart = NULL;
    double dev = 0.0, trip = 0.0;
    double x[3] = {1.0, 1.2, 1.4}, z[3], back[3];

    if (p3_structure_from_catalog("euler-top", &s) != P3_STATUS_OK) {
        fprintf(stderr, "%s\n", p3_last_error());
        return 1;
    }
    if (p3_chart_new(s, false, &chart) != P3_STATUS_OK) {
        return 1;
    }
    p3_chart_forward(chart, x, z);
    p3_chart_inverse(chart, z, back);
    P3Status st = p3_chart_verify(s, chart, 100, 42, &dev, &trip);
    printf("%d %g %g %s\n", (int)st, dev, trip, p3_version());
    p3_chart_free(chart);
    p3_structure_free(s);
    return st == P3_STATUS_OK ? 0 : 1;
}
