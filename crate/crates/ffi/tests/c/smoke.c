#include <math.h>
#include <stdio.h>
#include <string.h>

#include "hyperpolygon.h"

#define CHECK(cond)                                                        \
    do {                                                                   \
        if (!(cond)) {                                                     \
            fprintf(stderr, "%s:%d: %s (%s)\n", __FILE__, __LINE__, #cond, \
                    hp_last_error());                                      \
            return 1;                                                      \
        }                                                                  \
    } while (0)

int main(void) {
    HpQuiver *q = NULL;
    CHECK(hp_quiver_from_json("{\"arms\": [[1,2],[1,2],[1,2],[1,2]], \"loops\": 0}", &q) == HP_STATUS_OK);

    int64_t dp = 0, dx = 0;
    CHECK(hp_quiver_dims(q, &dp, &dx) == HP_STATUS_OK);
    CHECK(dp == 1 && dx == 2);

    double alpha[4] = {1.0, 1.1, 1.2, 1.3};
    HpSolution *s = NULL;
    CHECK(hp_solve(q, alpha, 4, 7, 0, &s) == HP_STATUS_OK);

    double res = 1.0;
    CHECK(hp_solution_residual(s, &res) == HP_STATUS_OK);
    CHECK(res < 1e-10);

    int64_t dim = 0;
    double gap = 0.0;
    CHECK(hp_solution_dimension(s, &dim, &gap) == HP_STATUS_OK);
    CHECK(dim == 2 && gap > 1e3);

    char *json = NULL;
    CHECK(hp_solution_to_json(s, &json) == HP_STATUS_OK);
    HpSolution *t = NULL;
    CHECK(hp_solution_from_json(json, &t) == HP_STATUS_OK);
    double res2 = 1.0;
    CHECK(hp_solution_residual(t, &res2) == HP_STATUS_OK);
    CHECK(res2 == res);

    HpQuiver *bad = NULL;
    CHECK(hp_quiver_from_json("{\"arms\": [[1,2],[1,3]], \"loops\": 0}", &bad) == HP_STATUS_INVALID_INPUT);
    CHECK(strlen(hp_last_error()) > 0);

    hp_string_free(json);
    hp_solution_free(t);
    hp_solution_free(s);
    hp_quiver_free(q);
    printf("ok %s\n", hp_version());
    return 0;
}
