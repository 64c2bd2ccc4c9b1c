#include <stdio.h>
#include <string.h>

#include "sesame.h"

int main(void) {
    SesameTerm *term = NULL;
    if (sesame_term_parse("[!\\m1m1-e1][e1?m2][e1?m3][m2>m3,m4]m4", &term) != SESAME_STATUS_OK) {
        fprintf(stderr, "parse: %s\n", sesame_last_error());
        return 1;
    }
    SesameRun *run = NULL;
    if (sesame_run(term, SESAME_MACHINE_SESAME, 1000, &run) != SESAME_STATUS_OK) {
        fprintf(stderr, "run: %s\n", sesame_last_error());
        return 1;
    }
    SesameMetrics m;
    sesame_run_metrics(run, &m);
    SesameTerm *result = NULL;
    sesame_run_result(run, &result);
    char *text = sesame_term_to_string(result, false);
    printf("transitions=%llu principal=%llu result=%s\n", (unsigned long long)m.transitions,
           (unsigned long long)m.principal, text);

    SesameTerm *bad = NULL;
    SesameStatus status = sesame_term_parse("[m1-", &bad);
    printf("syntax=%d error=%s\n", (int)status, sesame_last_error() ? "set" : "unset");

    sesame_string_free(text);
    sesame_term_free(result);
    sesame_run_free(run);
    sesame_term_free(term);
    return 0;
}
