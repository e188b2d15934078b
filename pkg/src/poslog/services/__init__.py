from poslog.services.check_suite import CheckSuiteService
