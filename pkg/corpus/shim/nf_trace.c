#include "nf_trace.h"

#include <stdio.h>
#include <stdlib.h>

static FILE *nf_out = NULL;
static int nf_err = 0;
static int nf_opened = 0;

static void nf_close(void)
{
    if (nf_out != NULL) {
        if (fflush(nf_out) != 0)
            nf_err = 1;
        fclose(nf_out);
        nf_out = NULL;
    }
}

static FILE *nf_stream(void)
{
    if (!nf_opened) {
        const char *path = getenv("NF_TRACE_FILE");
        if (path == NULL || path[0] == '\0')
            path = "nf.trace";
        nf_out = fopen(path, "w");
        if (nf_out == NULL)
            nf_err = 1;
        else
            atexit(nf_close);
        nf_opened = 1;
    }
    return nf_out;
}

void nf_trace(const char *pp, const char **names, long long *vals, int n)
{
    FILE *f = nf_stream();
    int i, rc;
    if (f == NULL)
        return;
    rc = fprintf(f, "{\"pp\":\"%s\",\"vars\":{", pp);
    for (i = 0; i < n && rc >= 0; i++)
        rc = fprintf(f, "%s\"%s\":%lld", i ? "," : "", names[i], vals[i]);
    if (rc >= 0)
        rc = fprintf(f, "}}\n");
    if (rc < 0)
        nf_err = 1;
}

int nf_trace_error(void)
{
    return nf_err;
}
