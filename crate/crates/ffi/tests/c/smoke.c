#include <math.h>
#include <stdio.h>
#include <string.h>

#include "pgst.h"

#define CHECK(cond)                                                  \
    do {                                                             \
        if (!(cond)) {                                               \
            char msg[256];                                           \
            pgst_last_error_message(msg, sizeof msg);                \
            fprintf(stderr, "%s:%d: %s (%s)\n", __FILE__, __LINE__, \
                    #cond, msg);                                     \
            return 1;                                                \
        }                                                            \
    } while (0)

int main(void) {
    PgstState *state = NULL;
    PgstVerdict *verdict = NULL;
    char *json = NULL;
    bool yes = false;
    size_t support[16];
    size_t len = 0;
    double overlap = 0.0, fidelity = 0.0;

    CHECK(strlen(pgst_version()) > 0);

    CHECK(pgst_state_parse("1:1,3:1", 11, &state) == PGST_STATUS_OK);
    CHECK(pgst_support(state, support, 16, &len) == PGST_STATUS_OK);
    CHECK(len == 10);

    CHECK(pgst_decide(state, PGST_METHOD_AUTO, &verdict) == PGST_STATUS_OK);
    CHECK(pgst_verdict_answer(verdict, &yes) == PGST_STATUS_OK);
    CHECK(yes);
    CHECK(pgst_verdict_to_json(verdict, &json) == PGST_STATUS_OK);
    CHECK(pgst_verdict_check_json(json) == PGST_STATUS_OK);
    pgst_string_free(json);
    pgst_verdict_free(verdict);
    pgst_state_free(state);

    CHECK(pgst_state_parse("1:1", 2, &state) == PGST_STATUS_OK);
    CHECK(pgst_transfer_fidelity(state, 1.5707963267948966, &overlap, &fidelity) == PGST_STATUS_OK);
    CHECK(fabs(fidelity - 1.0) < 1e-12);
    pgst_state_free(state);

    CHECK(pgst_state_parse("1:?", 4, &state) == PGST_STATUS_PARSE_ERROR);
    CHECK(state == NULL);
    CHECK(pgst_last_error_message(NULL, 0) > 0);

    printf("ok\n");
    return 0;
}
