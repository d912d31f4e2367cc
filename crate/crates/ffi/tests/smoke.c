#include <stdio.h>
#include <string.h>
#include "premax.h"

int main(void) {
    PremaxConfig *cfg = NULL;
    if (premax_config_default(&cfg) != PREMAX_STATUS_OK) return 10;

    double pts[2] = {0.0, 0.0};
    PremaxTrace *trace = NULL;
    if (premax_closure_run(cfg, pts, 1, &trace) != PREMAX_STATUS_OK) return 11;
    PremaxVerdict v;
    size_t at = 99;
    premax_trace_verdict(trace, &v, &at);
    if (v != PREMAX_VERDICT_STABILIZED || at != 0) return 12;
    premax_trace_free(trace);

    double bad[4] = {0.0, 0.0, 0.5, 0.5};
    if (premax_shadow(cfg, bad, 2, false, PREMAX_METHOD_NEWTON, NULL, 0, NULL, NULL) != PREMAX_STATUS_REFUSAL) return 13;
    printf("%s\n", premax_last_error());
    premax_config_free(cfg);
    printf("premax %s\n", premax_version());
    return 0;
}
