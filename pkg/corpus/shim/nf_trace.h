/* Trace probe runtime: one wire-format line per call.
 *
 * Records go to the file named by the NF_TRACE_FILE environment variable
 * (default "nf.trace"). The stream is flushed at process exit. Write
 * failures are dropped silently but latch a process-global error flag.
 * Single-threaded by contract: instrumented fixtures run one process,
 * one thread at a time.
 */
#ifndef NF_TRACE_H
#define NF_TRACE_H

void nf_trace(const char *pp, const char **names, long long *vals, int n);

/* 1 once any record failed to write, 0 otherwise; query before exit. */
int nf_trace_error(void);

#endif
