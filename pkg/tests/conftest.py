# Shared pytest configuration.  Keeping a conftest here also puts the tests
# directory on sys.path so the test modules can import _oracles.
