#include <stdio.h>
#include <stdlib.h>
#include <string.h>

#include "trachtenberg.h"

#define CHECK(cond)                                                        \
    do {                                                                   \
        if (!(cond)) {                                                     \
            const char *msg = tb_last_error_message();                     \
            fprintf(stderr, "%s:%d: check failed: %s (%s)\n", __FILE__,    \
                    __LINE__, #cond, msg ? msg : "no error message");      \
            return 1;                                                      \
        }                                                                  \
    } while (0)

int main(void) {
    char *product = NULL;
    CHECK(tb_multiply("497", 12, &product) == TB_STATUS_OK);
    CHECK(strcmp(product, "5964") == 0);
    tb_string_free(product);

    product = NULL;
    CHECK(tb_multiply("497", 2, &product) == TB_STATUS_UNSUPPORTED_MULTIPLIER);
    CHECK(product == NULL);
    CHECK(strstr(tb_last_error_message(), "unsupported multiplier") != NULL);
    CHECK(tb_multiply("4x7", 9, &product) == TB_STATUS_PARSE_ERROR);
    CHECK(tb_multiply(NULL, 9, &product) == TB_STATUS_NULL_POINTER);

    TbTrace *trace = NULL;
    CHECK(tb_trace_new("497", 6, &trace) == TB_STATUS_OK);
    CHECK(strcmp(tb_trace_product(trace), "2982") == 0);
    CHECK(tb_trace_step_count(trace) == 4);
    CHECK(tb_trace_extra_leading_digit(trace) == -1);
    TbStep step;
    CHECK(tb_trace_step(trace, 1, &step) == TB_STATUS_OK);
    CHECK(step.role == TB_ROLE_INTERIOR);
    CHECK(step.digit == 9 && step.neighbour == 7);
    CHECK(step.carry_in == 1 && step.sum == 18);
    CHECK(step.result_digit == 8 && step.carry_out == 1);
    CHECK(tb_trace_step(trace, 4, &step) == TB_STATUS_DOMAIN_ERROR);
    char *table = NULL;
    CHECK(tb_trace_render_table(trace, &table) == TB_STATUS_OK);
    CHECK(strchr(table, '|') != NULL);
    tb_string_free(table);
    tb_trace_free(trace);

    TbSession *session = NULL;
    CHECK(tb_session_new("{\"multipliers\":[11],\"min_digits\":2,\"max_digits\":2,"
                         "\"mode\":\"answer_only\",\"seed\":1,\"problem_count\":1}",
                         &session) == TB_STATUS_OK);
    char *challenge = NULL;
    CHECK(tb_session_next(session, &challenge) == TB_STATUS_OK);
    CHECK(strstr(challenge, "\"final_product\"") != NULL);
    tb_string_free(challenge);
    TbVerdict verdict;
    CHECK(tb_session_respond_json(session, "{\"challenge_id\":\"p0-product\",\"product\":\"0\"}",
                                  &verdict, NULL) == TB_STATUS_OK);
    CHECK(verdict == TB_VERDICT_INCORRECT);
    challenge = NULL;
    CHECK(tb_session_next(session, &challenge) == TB_STATUS_SESSION_FINISHED);
    CHECK(challenge == NULL);
    char *summary = NULL;
    CHECK(tb_session_summary(session, &summary) == TB_STATUS_OK);
    CHECK(strstr(summary, "\"finished\":true") != NULL);
    tb_string_free(summary);
    tb_session_free(session);

    printf("ok %s\n", tb_version());
    return 0;
}
