#pragma once

#include <cstdint>
#include <istream>
#include <set>
#include <string>
#include <vector>

#include "contagionx/calendar.hpp"
#include "contagionx/ledger.hpp"

namespace contagionx {

/// One interbank deal: lender_id lent `amount` to borrower_id on trade_date
/// for maturity_days calendar days.
struct TransactionRecord {
    Day trade_date;
    std::string lender_id;
    std::string borrower_id;
    Money amount;
    std::uint32_t maturity_days = 1;
};

struct BalanceSheetRecord {
    Day date;
    std::string bank_id;
    Money capital;
    Money other_risk;
    ThresholdClass threshold_class = ThresholdClass::DepositTaking;
};

/// Row-level outcome of a CSV read. In non-strict mode malformed rows are
/// skipped and counted; strict mode throws at the first bad row.
struct CsvDiagnostics {
    std::size_t rows_read = 0;
    std::size_t rows_skipped = 0;
    std::vector<std::string> warnings;
};

/// CSV schema: date,lender_id,borrower_id,amount,maturity_days
std::vector<TransactionRecord> read_transactions_csv(std::istream& in, bool strict,
                                                     CsvDiagnostics& diagnostics);

/// CSV schema: date,bank_id,capital,other_risk,threshold_class
std::vector<BalanceSheetRecord> read_balance_sheets_csv(std::istream& in, bool strict,
                                                        CsvDiagnostics& diagnostics);

/// Builds the netted outstanding graph for one day. A transaction is live
/// when trade_date <= date < trade_date + maturity_days. Banks in
/// `exclusions` are dropped together with their deals. The bank universe is
/// every non-excluded bank with a balance-sheet record on or before `date`
/// (most recent record wins; forward-filling emits a warning); an active
/// bank without coverage is an ingestion error.
ExposureSnapshot build_snapshot(const std::vector<TransactionRecord>& transactions,
                                const std::vector<BalanceSheetRecord>& balance_sheets, Day date,
                                const std::set<std::string>& exclusions,
                                std::vector<std::string>* warnings = nullptr);

/// One snapshot per calendar day of [first, last], both ends included.
std::vector<ExposureSnapshot>
snapshot_series(const std::vector<TransactionRecord>& transactions,
                const std::vector<BalanceSheetRecord>& balance_sheets, Day first, Day last,
                const std::set<std::string>& exclusions,
                std::vector<std::string>* warnings = nullptr);

} // namespace contagionx
