"""
Funciones auxiliares compartidas: semillas derivadas, hashes estables y
etiquetas de carpetas de resultados.
"""

from __future__ import annotations

import hashlib
import json
import re
import zlib
from typing import Any

import numpy as np


RUN_LABEL_UNSAFE = re.compile(r"[^A-Za-z0-9._-]+")


def run_label(name: str) -> str:
    """Etiqueta de carpeta de resultados a partir del nombre de un escenario.

    Solo se conservan letras, dígitos, ``.``, ``_`` y ``-``; el resto pasa a
    ``_``. Un nombre vacío da ``escenario``.
    """
    label = RUN_LABEL_UNSAFE.sub("_", name.strip()).strip("._")
    return label or "escenario"


def stable_hash(text: str) -> int:
    """Hash de 32 bits independiente de ``PYTHONHASHSEED``."""
    return zlib.crc32(text.encode("utf-8"))


def derive_seed(master: int, *parts: Any) -> int:
    """Semilla independiente para una celda, prueba o enlace a partir de la maestra.

    Las partes de texto se convierten con :func:`stable_hash`, de modo que el
    resultado no depende del orden de ejecución ni del proceso.
    """
    entropy = [int(master)]
    for part in parts:
        entropy.append(stable_hash(part) if isinstance(part, str) else int(part))
    state = np.random.SeedSequence(entropy).generate_state(1, dtype=np.uint64)
    return int(state[0]) >> 1


def canonical_json(data: Any) -> str:
    """JSON con claves ordenadas y sin espacios, apto para calcular hashes."""
    return json.dumps(data, sort_keys=True, separators=(",", ":"), ensure_ascii=False, default=str)


def config_hash(data: Any) -> str:
    """SHA-256 corto del JSON canónico de ``data``."""
    return hashlib.sha256(canonical_json(data).encode("utf-8")).hexdigest()[:16]


def file_digest(path: str) -> str:
    """SHA-256 del contenido de un fichero, leído por bloques."""
    h = hashlib.sha256()
    with open(path, "rb") as f:
        for chunk in iter(lambda: f.read(8192), b""):
            h.update(chunk)
    return h.hexdigest()
