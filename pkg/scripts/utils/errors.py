class SetrefError(Exception):
    """Base error. `exit_code` is what the CLI exits with."""
    exit_code = 2


class UsageError(SetrefError):
    exit_code = 1


class DataError(SetrefError):
    exit_code = 2


class ConfigError(DataError):
    pass


class ShapeError(DataError):
    pass


class SceneFileError(DataError):
    def __init__(self, message: str, path=None, line: int = None, column: int = None):
        location = ""
        if path is not None:
            location = str(path)
            if line is not None:
                location += f":{line}"
                if column is not None:
                    location += f":{column}"
            location += ": "
        super().__init__(location + message)
        self.path = path
        self.line = line
        self.column = column


class SceneValidationError(DataError):
    def __init__(self, message: str, scene_id: str = None):
        prefix = f"scene '{scene_id}': " if scene_id is not None else ""
        super().__init__(prefix + message)
        self.scene_id = scene_id


class ModelFileError(DataError):
    pass


class NumericError(SetrefError):
    exit_code = 3


class NonFiniteError(NumericError):
    pass
