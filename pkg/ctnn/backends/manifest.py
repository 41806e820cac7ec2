'''
Copyright (C) 2024 The ctnn developers

Please see the LICENSE file for the terms and conditions
associated with this software.
'''
import hashlib
import os
from typing import Optional

from yapic import json


def file_checksum(path: str) -> str:
    digest = hashlib.sha256()
    with open(path, 'rb') as fp:
        for chunk in iter(lambda: fp.read(1 << 16), b''):
            digest.update(chunk)
    return digest.hexdigest()


def write_manifest(directory: str, command: str, config: dict, weights: Optional[str] = None, artifacts=None, filename: str = 'manifest.json') -> str:
    """
    Run manifest: the command, the fully resolved config (seeds included), the SHA-256 of
    the weight file and of every artifact the command wrote. Paths are stored relative to
    directory so two runs with the same inputs give the same bytes.
    """
    manifest = {'command': command, 'seed': config.get('seed'), 'config': config}
    if weights:
        manifest['weights'] = {'path': os.path.basename(weights), 'sha256': file_checksum(weights)}
    if artifacts:
        manifest['artifacts'] = {os.path.relpath(a, directory): file_checksum(a) for a in sorted(artifacts)}
    path = os.path.join(directory, filename)
    with open(path, 'w') as fp:
        fp.write(json.dumps(manifest))
    return path


def read_manifest(path: str) -> dict:
    with open(path) as fp:
        return json.loads(fp.read())
