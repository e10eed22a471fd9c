/* SPDX-License-Identifier: Apache-2.0 */
/* Copyright (C) 2026 The adgate Authors */

/*
 * C interface to the adgate screening engine.
 *
 * Every fallible call returns an adgate_status. On failure a description
 * is available from adgate_last_error() on the same thread until the next
 * call into the library. Handles are opaque; free each with its matching
 * *_free function. Strings returned through char** out-parameters are
 * NUL-terminated, owned by the caller and released with adgate_string_free.
 */
#ifndef ADGATE_ADGATE_H
#define ADGATE_ADGATE_H

#include <stddef.h>

#if defined(_WIN32)
#define ADGATE_API __declspec(dllexport)
#else
#define ADGATE_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum adgate_status {
  ADGATE_OK = 0,
  ADGATE_E_INVALID_ARGUMENT = 1,
  ADGATE_E_EMPTY_LEXICON = 2,
  ADGATE_E_PHRASE_TOO_LONG = 3,
  ADGATE_E_INVALID_THRESHOLD = 4,
  ADGATE_E_EMPTY_CORPUS = 5,
  ADGATE_E_DIMENSION_MISMATCH = 6,
  ADGATE_E_MALFORMED_LINE = 7,
  ADGATE_E_ALL_MISSING_COLUMN = 8,
  ADGATE_E_DEGENERATE_COLUMN = 9,
  ADGATE_E_NON_POSITIVE_INPUT = 10,
  ADGATE_E_INVALID_K = 11,
  ADGATE_E_SHAPE_MISMATCH = 12,
  ADGATE_E_EMPTY_IMAGE = 13,
  ADGATE_E_SINGLE_CLASS = 14,
  ADGATE_E_NO_VALID_RECORDS = 15,
  ADGATE_E_SCHEMA_VIOLATION = 16,
  ADGATE_E_EMPTY_CHANNEL = 17,
  ADGATE_E_INVALID_CHANNEL_LIST = 18,
  ADGATE_E_IO = 19,
  ADGATE_E_FORMAT = 20,
  ADGATE_E_NOT_FOUND = 21,
  ADGATE_E_CONFLICT = 22,
  ADGATE_E_NULL_POINTER = 100,
  ADGATE_E_BAD_HANDLE = 101,
  ADGATE_E_INTERNAL = 102
} adgate_status;

typedef struct adgate_lexicon adgate_lexicon;
typedef struct adgate_store adgate_store;
typedef struct adgate_model adgate_model;
typedef struct adgate_service adgate_service;

ADGATE_API const char *adgate_version(void);
/* Stable name of a status ("OK", "EmptyLexicon", ...). */
ADGATE_API const char *adgate_status_name(int status);
/* Message for the last failure on this thread, "" if none. */
ADGATE_API const char *adgate_last_error(void);
ADGATE_API void adgate_string_free(char *s);

/* -- lexicon ------------------------------------------------------------ */

/* Parses a vocabulary file's contents (one phrase per line, '#' comments). */
ADGATE_API int adgate_lexicon_parse(const char *text, size_t len, adgate_lexicon **out);
ADGATE_API int adgate_lexicon_size(const adgate_lexicon *lex, size_t *out);
/* Normalized vocabulary, one phrase per line. */
ADGATE_API int adgate_lexicon_text(const adgate_lexicon *lex, char **out);
/*
 * Runs the text pipeline on raw text and reports the fraction of token
 * positions covered by phrases. *insufficient is set to 1 for text with no
 * tokens left.
 */
ADGATE_API int adgate_lexicon_ratio(const adgate_lexicon *lex, const char *text, size_t len, double *ratio,
                                    int *insufficient);
/* 1 when ratio > threshold and the text was sufficient, else 0. */
ADGATE_API int adgate_lexicon_label(const adgate_lexicon *lex, const char *text, size_t len, double threshold,
                                    int *offensive);
ADGATE_API void adgate_lexicon_free(adgate_lexicon *lex);

/* -- record store --------------------------------------------------------- */

/* Merges record files into the store directory (created when absent).
 * *summary receives a JSON document with counts and per-line diagnostics. */
ADGATE_API int adgate_ingest(const char *store_dir, const char *const *record_files, size_t n_files,
                             char **summary);
/* Labels every stored record with the vocabulary and writes labels.json. */
ADGATE_API int adgate_label(const char *store_dir, const adgate_lexicon *lex, double threshold, char **summary);
/* Trains on a labeled store. config_file may be NULL for defaults. */
ADGATE_API int adgate_train(const char *store_dir, const char *embeddings_file, const char *config_file,
                            const char *out_dir, char **summary);

ADGATE_API int adgate_store_open(const char *store_dir, adgate_store **out);
ADGATE_API int adgate_store_video_count(const adgate_store *store, size_t *out);
ADGATE_API void adgate_store_free(adgate_store *store);

/* -- trained model -------------------------------------------------------- */

ADGATE_API int adgate_model_open(const char *model_dir, adgate_model **out);
ADGATE_API int adgate_model_version(const adgate_model *model, char **out);
ADGATE_API void adgate_model_free(adgate_model *model);

/*
 * Scores the channels named in a channel-list file's contents. lex may be
 * NULL to use the vocabulary saved with the model. *report receives the
 * report document.
 */
ADGATE_API int adgate_score(const adgate_store *store, const adgate_model *model, const adgate_lexicon *lex,
                            const char *channels_text, size_t len, double threshold, char **report);

/* -- HTTP service ------------------------------------------------------------ */

typedef struct adgate_service_options {
  const char *host;        /* NULL means 127.0.0.1 */
  int port;                /* 0 picks a free port */
  const char *cors_origin; /* NULL or "" disables CORS headers */
  const char *static_dir;  /* NULL or "" serves no static files */
  unsigned workers;        /* 0 means 2 */
} adgate_service_options;

/* Starts serving in background threads; the store and model may be freed
 * afterwards. */
ADGATE_API int adgate_service_start(const adgate_store *store, const adgate_model *model,
                                    const adgate_service_options *options, adgate_service **out);
ADGATE_API int adgate_service_port(const adgate_service *service, int *out);
/* Stops serving and frees the handle. */
ADGATE_API void adgate_service_stop(adgate_service *service);

#ifdef __cplusplus
}
#endif

#endif /* ADGATE_ADGATE_H */
