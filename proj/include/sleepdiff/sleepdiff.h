/* C API for the sleep staging library: synthetic data generation, training,
 * leave-one-domain-out evaluation, ablation sweeps, attention export, and the
 * gradient check suite. All functions return sd_status; on failure call
 * sd_last_error() for a message. String results are heap-allocated and must
 * be released with sd_string_free(). */

#ifndef SLEEPDIFF_H
#define SLEEPDIFF_H

#include <stddef.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum {
    SD_OK = 0,
    SD_ERR_INVALID_ARG = 1,
    SD_ERR_IO = 2,
    SD_ERR_FORMAT = 3, /* bad magic/version/truncation in a container or checkpoint */
    SD_ERR_RUNTIME = 4,
} sd_status;

/* Message for the most recent failure on this thread. Never NULL. */
const char* sd_last_error(void);

void sd_string_free(char* s);

/* ------------------------------------------------------------- config --- */

/* Key-value configuration. Recognized keys mirror the CLI flags:
 * sources (comma-separated), target, epochs, batch, lr, dropout, lambda_rec,
 * lambda_align, n_seq, d, layers, mdta_heads, seq_heads, seed, da, se, ca,
 * fa, id; generator keys: gen.domains, gen.recordings, gen.epochs, gen.seed,
 * and per-domain overrides gen.domain<N>.{gain,noise,polarity,tilt,offset,rate}. */
typedef struct sd_config sd_config;

sd_config* sd_config_create(void);
void sd_config_free(sd_config* cfg);
sd_status sd_config_set(sd_config* cfg, const char* key, const char* value);
/* Returns NULL if the key is unset; caller frees with sd_string_free. */
char* sd_config_get(const sd_config* cfg, const char* key);
sd_status sd_config_load_file(sd_config* cfg, const char* path);
sd_status sd_config_save_file(const sd_config* cfg, const char* path);

/* ----------------------------------------------------------- pipeline --- */

/* Writes one .slpd container per recording into out_dir, named
 * domain<D>_rec<R>.slpd. */
sd_status sd_generate(const sd_config* cfg, const char* out_dir);

/* Trains one model on the .slpd files whose domain id is listed in the
 * config's sources, saves a checkpoint, and returns a text report. */
sd_status sd_train(const sd_config* cfg, const char* const* data_paths, size_t n_paths,
                   const char* checkpoint_out, char** report_out);

/* Evaluates a checkpoint against the given .slpd files. */
sd_status sd_evaluate(const char* checkpoint_path, const char* const* data_paths, size_t n_paths,
                      char** report_out);

/* Full leave-one-domain-out protocol over every domain found in the data.
 * csv_out may be NULL to skip the CSV. */
sd_status sd_loocv(const sd_config* cfg, const char* const* data_paths, size_t n_paths,
                   const char* csv_out, char** report_out);

/* Six-row ablation sweep (full model, then each flag disabled in turn)
 * against the config's target domain. */
sd_status sd_ablate(const sd_config* cfg, const char* const* data_paths, size_t n_paths,
                    const char* csv_out, char** report_out);

/* Exports per-epoch attention maps for the first sequence of the given
 * container as CSV + JSON index + SVG strips. n_dsa_maps_out may be NULL. */
sd_status sd_export_attention(const char* checkpoint_path, const char* data_path,
                              const char* out_dir, int* n_dsa_maps_out);

/* Runs the central-difference gradient suite; report always returned.
 * Returns SD_OK only if every check passed. */
sd_status sd_gradcheck(char** report_out);

#ifdef __cplusplus
}
#endif

#endif /* SLEEPDIFF_H */
