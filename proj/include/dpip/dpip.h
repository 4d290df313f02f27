/* Copyright 2026 The dpip Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

/* C interface to libdpip.
 *
 * Every call returns a dpip_status. On anything other than DPIP_OK or
 * DPIP_DENY, dpip_last_error() describes the failure for the calling thread.
 * Strings and buffers handed out through out-parameters are owned by the
 * caller and released with dpip_free(). */

#ifndef DPIP_DPIP_H_
#define DPIP_DPIP_H_

#include <stddef.h>
#include <stdint.h>

#if defined(DPIP_BUILDING)
#define DPIP_API __attribute__((visibility("default")))
#else
#define DPIP_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum dpip_status {
  DPIP_OK = 0,
  DPIP_DENY = 1,
  DPIP_ERR_USAGE = 2,     /* invalid argument or malformed input */
  DPIP_ERR_TRANSPORT = 3, /* peer or daemon unreachable */
  DPIP_ERR_AUTH = 4,      /* admin token rejected */
  DPIP_ERR_NOT_FOUND = 5, /* unknown user, resource or peer */
  DPIP_ERR_CONFIG = 6,
  DPIP_ERR_IO = 7,
  DPIP_ERR_INTERNAL = 8
} dpip_status;

typedef struct dpip_domain dpip_domain;

DPIP_API const char* dpip_version(void);
DPIP_API const char* dpip_status_name(int status);
/* Message for the last failure on this thread; never NULL. */
DPIP_API const char* dpip_last_error(void);
DPIP_API void dpip_free(void* p);

/* Standard base64 (with padding) of `len` bytes. */
DPIP_API int dpip_base64_encode(const uint8_t* data, size_t len,
                                char** out);

/* Runs the trustee setup for `federation_id` and writes the TPK file. */
DPIP_API int dpip_trustee_init(const char* federation_id, const char* out_path);

/* Opens a domain from its INI config. `data_dir` (nullable) overrides the
 * configured data directory. With `log_to_stderr` set, protocol events are
 * logged one per line on stderr. */
DPIP_API int dpip_domain_open(const char* config_path, const char* data_dir,
                              int log_to_stderr, dpip_domain** out);
DPIP_API void dpip_domain_close(dpip_domain* domain);

/* Serves the HTTP endpoints on a background thread. `port_out` (nullable)
 * receives the bound port. */
DPIP_API int dpip_domain_start(dpip_domain* domain, int* port_out);
DPIP_API int dpip_domain_stop(dpip_domain* domain);
/* Base URL the domain advertises in its config, e.g. http://127.0.0.1:8081 */
DPIP_API int dpip_domain_url(dpip_domain* domain, char** url_out);
/* Admin token from the config (or DPIP_ADMIN_TOKEN). */
DPIP_API int dpip_domain_admin_token(dpip_domain* domain, char** token_out);

/* POSTs a JSON body to <base_url>/v1/admin/<kind> where kind is one of
 * "users", "resources", "policies". DPIP_OK on HTTP 200, DPIP_ERR_AUTH on
 * 403, DPIP_ERR_NOT_FOUND on 404, DPIP_ERR_USAGE otherwise. `response_out`
 * (nullable) receives the response body. */
DPIP_API int dpip_admin_post(const char* base_url, const char* token,
                             const char* kind, const char* json_body,
                             char** response_out);

/* Remote resource names as a JSON array of {resource_id, display_name}. */
DPIP_API int dpip_client_list(dpip_domain* domain, const char* peer,
                              char** json_out);

/* Requests `resource_id` from `peer` on behalf of local user `user_id`.
 * `mode` is "fresh" or "cached". Returns DPIP_OK on Permit and DPIP_DENY on
 * Deny; in both cases `result_json_out` receives
 *   {decision, reason, peer, resource_id, user_id, mode, content_length,
 *    timings: {...}, peer_calls: [...], missing: [...]?}
 * and on Permit `content_out`/`content_len` receive the resource bytes. */
DPIP_API int dpip_client_get(dpip_domain* domain, const char* peer,
                             const char* resource_id, const char* user_id,
                             const char* mode, char** result_json_out,
                             uint8_t** content_out, size_t* content_len);

/* Local decision for `user_id` on `resource_id`. `request_attrs_json` is a
 * JSON array of {category, name, value} (nullable for none). Returns DPIP_OK
 * on Permit, DPIP_DENY on Deny; `decision_json_out` receives
 * {decision, reason}. */
DPIP_API int dpip_pdp_decide(dpip_domain* domain, const char* user_id,
                             const char* resource_id,
                             const char* request_attrs_json,
                             char** decision_json_out);

/* Runs the benchmark described by an INI file and writes bench.csv,
 * fig4.dat, fig5.dat, fig6.dat and summary.md into `out_dir`. Scratch data
 * goes to `work_dir` (nullable: <out_dir>/work). `summary_json_out`
 * (nullable) receives medians and trend verdicts. */
DPIP_API int dpip_bench_run(const char* config_path, const char* out_dir,
                            const char* work_dir, char** summary_json_out);

#ifdef __cplusplus
}
#endif

#endif /* DPIP_DPIP_H_ */
