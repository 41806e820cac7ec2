'''
Copyright (C) 2024 The ctnn developers

Please see the LICENSE file for the terms and conditions
associated with this software.
'''
from setuptools import find_packages, setup


def get_long_description():
    """Read the contents of README.md, INSTALL.md and CHANGES.md files."""
    from os import path

    repo_dir = path.abspath(path.dirname(__file__))
    markdown = []
    for filename in ["README.md", "INSTALL.md", "CHANGES.md"]:
        with open(path.join(repo_dir, filename), encoding="utf-8") as markdown_file:
            markdown.append(markdown_file.read())
    return "\n\n----\n\n".join(markdown)


setup(
    name="ctnn",
    version="0.1.0",
    author="The ctnn developers",
    description="Corticothalamic auto-encoder: a thalamic gate that only wakes the cortex network when the input changes",
    long_description=get_long_description(),
    long_description_content_type="text/markdown",
    license="XFree86",
    keywords=["auto-encoder", "predictive coding", "thalamus", "multi-modal", "numpy", "change detection"],
    packages=find_packages(exclude=['tests*']),
    python_requires='>=3.8',
    classifiers=[
        "Intended Audience :: Science/Research",
        "Development Status :: 4 - Beta",
        "Programming Language :: Python :: 3 :: Only",
        "Programming Language :: Python :: 3.8",
        "Programming Language :: Python :: 3.9",
        "Programming Language :: Python :: 3.10",
    ],
    install_requires=[
        "numpy>=1.20",
        "pyyaml",
        "yapic.json>=1.6.3",
    ],
    extras_require={
        "test": ["pytest"],
    },
    entry_points={
        "console_scripts": ["ctnn=ctnn.cli:main"],
    },
)
