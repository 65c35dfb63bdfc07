#include "contagionx/ingest.hpp"

#include <algorithm>
#include <charconv>
#include <map>
#include <sstream>

#include "contagionx/errors.hpp"

namespace contagionx {

namespace {

std::vector<std::string_view> split_fields(std::string_view line) {
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = line.find(',', start);
        if (comma == std::string_view::npos) {
            fields.push_back(line.substr(start));
            break;
        }
        fields.push_back(line.substr(start, comma - start));
        start = comma + 1;
    }
    return fields;
}

std::string_view strip_cr(std::string_view line) {
    if (!line.empty() && line.back() == '\r')
        line.remove_suffix(1);
    return line;
}

std::string_view strip_bom(std::string_view line) {
    if (line.size() >= 3 && line.substr(0, 3) == "\xef\xbb\xbf")
        line.remove_prefix(3);
    return line;
}

std::uint32_t parse_positive_int(std::string_view text, const char* what) {
    std::uint32_t value = 0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc{} || ptr != text.data() + text.size() || value == 0)
        throw ValidationError(std::string(what) + " must be a positive integer, got '" +
                              std::string(text) + "'");
    return value;
}

template <typename Record, typename ParseRow>
std::vector<Record> read_csv(std::istream& in, bool strict, CsvDiagnostics& diagnostics,
                             std::string_view expected_header, ParseRow&& parse_row) {
    std::vector<Record> records;
    std::string line;
    std::size_t line_number = 0;
    bool saw_header = false;
    while (std::getline(in, line)) {
        ++line_number;
        std::string_view view = strip_cr(line);
        if (line_number == 1)
            view = strip_bom(view);
        if (view.empty())
            continue;
        if (!saw_header) {
            if (view != expected_header)
                throw ValidationError("line 1: expected header '" + std::string(expected_header) +
                                      "', got '" + std::string(view) + "'");
            saw_header = true;
            continue;
        }
        try {
            records.push_back(parse_row(view));
            ++diagnostics.rows_read;
        } catch (const ValidationError& err) {
            const std::string message = "line " + std::to_string(line_number) + ": " + err.what();
            if (strict)
                throw ValidationError(message);
            ++diagnostics.rows_skipped;
            diagnostics.warnings.push_back(message);
        }
    }
    if (!saw_header)
        throw ValidationError("empty CSV input, header line missing");
    return records;
}

} // namespace

std::vector<TransactionRecord> read_transactions_csv(std::istream& in, bool strict,
                                                     CsvDiagnostics& diagnostics) {
    return read_csv<TransactionRecord>(
        in, strict, diagnostics, "date,lender_id,borrower_id,amount,maturity_days",
        [](std::string_view row) {
            const auto fields = split_fields(row);
            if (fields.size() != 5)
                throw ValidationError("expected 5 fields, got " + std::to_string(fields.size()));
            TransactionRecord record;
            record.trade_date = Day::parse_iso(fields[0]);
            record.lender_id = std::string(fields[1]);
            record.borrower_id = std::string(fields[2]);
            record.amount = Money::parse(fields[3]);
            record.maturity_days = parse_positive_int(fields[4], "maturity_days");
            if (record.lender_id.empty() || record.borrower_id.empty())
                throw ValidationError("empty bank id");
            if (record.lender_id == record.borrower_id)
                throw ValidationError("lender and borrower coincide: '" + record.lender_id + "'");
            if (!(record.amount > Money{}))
                throw ValidationError("amount must be positive, got " + record.amount.str());
            return record;
        });
}

std::vector<BalanceSheetRecord> read_balance_sheets_csv(std::istream& in, bool strict,
                                                        CsvDiagnostics& diagnostics) {
    return read_csv<BalanceSheetRecord>(
        in, strict, diagnostics, "date,bank_id,capital,other_risk,threshold_class",
        [](std::string_view row) {
            const auto fields = split_fields(row);
            if (fields.size() != 5)
                throw ValidationError("expected 5 fields, got " + std::to_string(fields.size()));
            BalanceSheetRecord record;
            record.date = Day::parse_iso(fields[0]);
            record.bank_id = std::string(fields[1]);
            record.capital = Money::parse(fields[2]);
            record.other_risk = Money::parse(fields[3]);
            record.threshold_class = threshold_class_from_string(fields[4]);
            if (record.bank_id.empty())
                throw ValidationError("empty bank id");
            if (record.capital.is_negative() || record.other_risk.is_negative())
                throw ValidationError("negative capital or other risk for bank '" +
                                      record.bank_id + "'");
            return record;
        });
}

ExposureSnapshot build_snapshot(const std::vector<TransactionRecord>& transactions,
                                const std::vector<BalanceSheetRecord>& balance_sheets, Day date,
                                const std::set<std::string>& exclusions,
                                std::vector<std::string>* warnings) {
    // Most recent balance sheet on or before `date`, per bank.
    std::map<std::string, const BalanceSheetRecord*> latest;
    for (const auto& record : balance_sheets) {
        if (record.date > date || exclusions.count(record.bank_id))
            continue;
        auto& slot = latest[record.bank_id];
        if (slot == nullptr || slot->date < record.date)
            slot = &record;
    }

    std::vector<BilateralClaim> live;
    std::set<std::string> active, missing;
    for (const auto& deal : transactions) {
        if (deal.trade_date > date || date >= deal.trade_date + static_cast<int>(deal.maturity_days))
            continue;
        if (exclusions.count(deal.lender_id) || exclusions.count(deal.borrower_id))
            continue;
        live.push_back({deal.borrower_id, deal.lender_id, deal.amount});
        for (const std::string* id : {&deal.lender_id, &deal.borrower_id}) {
            active.insert(*id);
            if (!latest.count(*id))
                missing.insert(*id);
        }
    }
    if (!missing.empty()) {
        std::ostringstream out;
        out << "no balance sheet on or before " << date.str() << " for active bank(s):";
        for (const auto& id : missing)
            out << ' ' << id;
        throw ValidationError(out.str());
    }

    std::vector<BankRecord> banks;
    banks.reserve(latest.size());
    for (const auto& [id, record] : latest) {
        BankRecord bank;
        bank.id = id;
        bank.capital = record->capital;
        bank.other_risk = record->other_risk;
        bank.threshold_class = record->threshold_class;
        banks.push_back(std::move(bank));
        if (warnings && record->date < date)
            warnings->push_back("balance sheet for bank '" + id + "' forward-filled from " +
                                record->date.str() + " to " + date.str());
    }

    return ExposureSnapshot(date, std::move(banks), net_exposures(live));
}

std::vector<ExposureSnapshot>
snapshot_series(const std::vector<TransactionRecord>& transactions,
                const std::vector<BalanceSheetRecord>& balance_sheets, Day first, Day last,
                const std::set<std::string>& exclusions, std::vector<std::string>* warnings) {
    if (first > last)
        throw ValidationError("empty date range: " + first.str() + " after " + last.str());
    std::vector<ExposureSnapshot> series;
    series.reserve(static_cast<std::size_t>(last - first) + 1);
    for (Day day = first; day <= last; ++day) {
        try {
            series.push_back(build_snapshot(transactions, balance_sheets, day, exclusions, warnings));
        } catch (const ValidationError& err) {
            throw ValidationError("snapshot for " + day.str() + ": " + err.what());
        }
    }
    return series;
}

} // namespace contagionx
