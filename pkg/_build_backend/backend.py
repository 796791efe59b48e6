"""PEP 517 backend: setuptools, configured from pyproject.toml only.

The root setup.py is a standalone installer script (see README), not a
setuptools configuration, so it must not be executed during builds.
"""
from setuptools import build_meta as _orig


class _Backend(_orig._BuildMetaBackend):
    def run_setup(self, setup_script='setup.py'):
        # A missing script makes setuptools fall back to a bare setup() call.
        super().run_setup(setup_script='_no_setup_script_.py')


_backend = _Backend()
get_requires_for_build_wheel = _backend.get_requires_for_build_wheel
get_requires_for_build_sdist = _backend.get_requires_for_build_sdist
get_requires_for_build_editable = _backend.get_requires_for_build_editable
prepare_metadata_for_build_wheel = _backend.prepare_metadata_for_build_wheel
prepare_metadata_for_build_editable = _backend.prepare_metadata_for_build_editable
build_wheel = _backend.build_wheel
build_sdist = _backend.build_sdist
build_editable = _backend.build_editable
