/* cc -I include c/smoke.c -L ../../target/release -lcdgl_ffi -o smoke */
#include <stdio.h>
#include "cdgl.h"

int main(void) {
    CdglModel *m = NULL;
    if (cdgl_model_fixture("cp2", &m) != CDGL_STATUS_OK) {
        fprintf(stderr, "%s\n", cdgl_last_error());
        return 2;
    }
    size_t b = 0;
    cdgl_model_betti(m, 4, &b);
    printf("cdgl %s: H_4(cp2) has rank %zu\n", cdgl_version(), b);

    char *json = NULL;
    CdglStatus st = cdgl_run(m, "classify-cell", NULL, &json);
    if (json) {
        puts(json);
        cdgl_string_free(json);
    }
    cdgl_model_free(m);
    return (int)st;
}
