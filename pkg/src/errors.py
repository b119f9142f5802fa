from typing import Iterable


class HypogenError(Exception):
    pass


class IngestError(HypogenError):
    """Input source could not be read at all. Malformed lines are not fatal."""


class InvalidFilterError(HypogenError):
    code = 'invalid-filter'


class NotFoundError(HypogenError):
    code = 'not-found'


class TemplateError(HypogenError):
    def __init__(self, template_id: str, missing: Iterable[str]):
        self.template_id = template_id
        self.missing = sorted(missing)
        super().__init__(f'Template "{template_id}" has unbound placeholders: {", ".join(self.missing)}')


class ParseError(HypogenError):
    pass


class ActionValidationError(HypogenError):
    pass


class ToolArgumentError(HypogenError):
    def __init__(self, parameter: str, message: str):
        self.parameter = parameter
        super().__init__(f'bad argument "{parameter}": {message}')


class BackendError(HypogenError):
    pass


class ReplayMismatchError(HypogenError):
    pass


class EpisodeError(HypogenError):
    pass


class ContractError(HypogenError):
    pass


class ConfigError(HypogenError):
    pass


class ServiceError(HypogenError):
    pass
