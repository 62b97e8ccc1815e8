from datetime import date

import pytest

from tenurekit.ingest import (DEFAULT_OBSERVATION_END, GenuineFilterPolicy,
                              OwnershipSpell, PeriodSegmentation,
                              TransactionRecord, build_spells, filter_genuine,
                              ingest_summary, parse_transactions,
                              segment_periods, spell_arrays)

HEADER = "parcel_id,neighborhood,sale_date,price,deed_kind,seller_is_builder,appraisal,sqft\n"


def write_csv(tmp_path, rows, header=HEADER):
    path = tmp_path / "txns.csv"
    path.write_text(header + "".join(r + "\n" for r in rows), encoding="utf-8")
    return path


def txn(parcel="P1", nbhd="A", sale="2000-01-01", price=100000.0,
        deed="warranty", builder=False):
    return TransactionRecord(parcel, nbhd, date.fromisoformat(sale), price,
                             deed, builder)


class TestParse:
    def test_round_trip(self, tmp_path):
        path = write_csv(tmp_path, [
            "P1,A,2000-05-17,250000,warranty,false,240000,1850",
            "P1,B,2010-06-01,0,quitclaim,false,,",
            "P2,H,2021-01-02,915000,warranty,true,,2400",
        ])
        result = parse_transactions(path)
        assert len(result.records) == 3
        assert not result.errors
        assert result.records[0].sale_date == date(2000, 5, 17)
        assert result.records[1].appraisal is None
        assert result.records[2].seller_is_builder is True

    def test_header_only_empty(self, tmp_path):
        result = parse_transactions(write_csv(tmp_path, []))
        assert result.records == [] and result.errors == []

    def test_bad_date_collected_with_line_number(self, tmp_path):
        path = write_csv(tmp_path, [
            "P1,A,2000-05-17,250000,warranty,false,,",
            "P2,A,2026-13-01,100,warranty,false,,",
        ])
        result = parse_transactions(path)
        assert len(result.records) == 1
        assert len(result.errors) == 1
        assert result.errors[0].line == 3
        assert "2026-13-01" in result.errors[0].message or "time data" in result.errors[0].message

    def test_date_window_and_enum_validation(self, tmp_path):
        path = write_csv(tmp_path, [
            "P1,A,1970-01-01,1,warranty,false,,",     # before window
            "P2,Z,2000-01-01,1,warranty,false,,",     # bad neighborhood
            "P3,A,2000-01-01,1,gift,false,,",         # bad deed kind
            "P4,A,2000-01-01,-5,warranty,false,,",    # negative price
        ])
        result = parse_transactions(path)
        assert not result.records
        assert [e.line for e in result.errors] == [2, 3, 4, 5]

    def test_unreadable_file_fatal(self, tmp_path):
        with pytest.raises(OSError):
            parse_transactions(tmp_path / "missing.csv")

    def test_adapter_maps_foreign_columns(self, tmp_path):
        header = "APN,SUBDIV,DocDate,SalePrice,DeedType,BuilderSale,AssessedValue,LivingArea\n"
        path = write_csv(tmp_path, ["X9,C,1999-03-04,120000,WD,0,110000,"],
                         header=header)
        adapter = {
            "columns": {"APN": "parcel_id", "SUBDIV": "neighborhood",
                        "DocDate": "sale_date", "SalePrice": "price",
                        "DeedType": "deed_kind", "BuilderSale": "seller_is_builder",
                        "AssessedValue": "appraisal", "LivingArea": "sqft"},
            "deed_kind_values": {"wd": "warranty"},
        }
        result = parse_transactions(path, adapter=adapter)
        assert len(result.records) == 1
        assert result.records[0].deed_kind == "warranty"


class TestBuildSpells:
    def test_three_sales_hand_arithmetic(self):
        recs = [txn(sale="2000-01-01"), txn(sale="2005-01-01"),
                txn(sale="2012-06-01")]
        spells = build_spells(recs)
        closed = [s for s in spells if not s.censored]
        censored = [s for s in spells if s.censored]
        assert [s.duration_days for s in closed] == [1827, 2708]
        assert len(censored) == 1
        # 2012-06-01 through 2025-01-31
        assert censored[0].duration_days == (date(2025, 1, 31) - date(2012, 6, 1)).days == 4627

    def test_single_sale_censored_31_days(self):
        spells = build_spells([txn(sale="2024-12-31")])
        assert len(spells) == 1
        assert spells[0].censored
        assert spells[0].duration_days == 31

    def test_no_records(self):
        assert build_spells([]) == []

    def test_same_day_duplicate_flagged_one_day(self):
        recs = [txn(sale="2001-01-01"), txn(sale="2005-06-06"),
                txn(sale="2005-06-06"), txn(sale="2010-01-01")]
        spells = build_spells(recs)
        dup = [s for s in spells if s.duplicate_sale]
        assert len(dup) == 1
        assert dup[0].duration_days == 1

    def test_spell_count_invariants(self):
        recs = ([txn("P1", sale=s) for s in
                 ("1990-01-05", "1999-02-06", "2004-03-07", "2020-04-08")]
                + [txn("P2", sale="2015-07-09")])
        spells = build_spells(recs)
        for parcel, n_sales in (("P1", 4), ("P2", 1)):
            mine = [s for s in spells if s.parcel_id == parcel]
            assert len(mine) == n_sales
            closed = [s for s in mine if not s.censored]
            assert len(closed) == n_sales - 1
            assert sum(1 for s in mine if s.censored) == 1
        # closed durations telescope to last - first sale date
        p1_closed = [s for s in spells if s.parcel_id == "P1" and not s.censored]
        total = sum(s.duration_days for s in p1_closed)
        assert total == (date(2020, 4, 8) - date(1990, 1, 5)).days

    def test_closing_transaction_attributes_attached(self):
        recs = [txn(sale="2000-01-01"),
                txn(sale="2004-01-01", deed="quitclaim", price=0.0)]
        spells = build_spells(recs)
        closed = next(s for s in spells if not s.censored)
        assert closed.exit_deed_kind == "quitclaim"
        assert closed.exit_price == 0.0


class TestFilterGenuine:
    def test_builder_flip_non_genuine(self):
        sp = OwnershipSpell("P", "A", date(2020, 1, 1), date(2020, 10, 27), 300,
                            False, exit_price=400000.0,
                            exit_deed_kind="warranty",
                            exit_seller_is_builder=True)
        assert not filter_genuine([sp])[0].genuine

    def test_default_pass(self):
        sp = OwnershipSpell("P", "A", date(2000, 1, 1), date(2010, 12, 14),
                            4000, False, exit_price=350000.0,
                            exit_deed_kind="warranty",
                            exit_seller_is_builder=False)
        assert filter_genuine([sp])[0].genuine

    def test_long_quitclaim_still_non_genuine(self):
        sp = OwnershipSpell("P", "A", date(2000, 1, 1), date(2008, 3, 20),
                            3000, False, exit_price=100.0,
                            exit_deed_kind="quitclaim",
                            exit_seller_is_builder=False)
        assert not filter_genuine([sp])[0].genuine

    def test_censored_always_retained(self):
        sp = OwnershipSpell("P", "A", date(2000, 1, 1), None, 9000, True)
        assert filter_genuine([sp])[0].genuine

    def test_builder_threshold_configurable(self):
        # 578-day builder hold: above the 548-day default, inside 600
        sp = OwnershipSpell("P", "A", date(2020, 1, 1), date(2021, 8, 1), 578,
                            False, exit_price=50.0, exit_deed_kind="warranty",
                            exit_seller_is_builder=True)
        assert filter_genuine([sp])[0].genuine is True
        loose = GenuineFilterPolicy(builder_max_days=600)
        assert filter_genuine([sp], loose)[0].genuine is False

    def test_idempotent(self):
        spells = build_spells([txn(sale="2000-01-01"), txn(sale="2001-01-01"),
                               txn(sale="2015-05-05")])
        once = filter_genuine(spells)
        twice = filter_genuine(once)
        assert once == twice


class TestSegmentPeriods:
    SEG = PeriodSegmentation(cutoff_date=date(2020, 3, 11),
                             observation_end=date(2025, 1, 31))

    def spell(self, entry, exit_=None):
        entry = date.fromisoformat(entry)
        if exit_ is None:
            return OwnershipSpell("P", "A", entry, None,
                                  (self.SEG.observation_end - entry).days, True)
        exit_ = date.fromisoformat(exit_)
        return OwnershipSpell("P", "A", entry, exit_, (exit_ - entry).days,
                              False, exit_price=1.0, exit_deed_kind="warranty",
                              exit_seller_is_builder=False)

    def test_entirely_pre(self):
        split = segment_periods([self.spell("2010-01-01", "2018-01-01")], self.SEG)
        assert len(split.pre) == 1 and not split.pre[0].censored
        assert split.post == []

    def test_straddler_in_both(self):
        split = segment_periods([self.spell("2015-01-01", "2022-01-01")], self.SEG)
        assert len(split.pre) == 1 and len(split.post) == 1
        assert split.pre[0].censored
        assert split.pre[0].duration_days == (date(2020, 3, 11) - date(2015, 1, 1)).days
        assert not split.post[0].censored
        assert split.post[0].duration_days == (date(2022, 1, 1) - date(2015, 1, 1)).days

    def test_post_only(self):
        anchor = self.spell("2010-01-01", "2018-01-01")
        late = self.spell("2021-01-01")
        split = segment_periods([anchor, late], self.SEG)
        assert late not in split.pre
        assert late in split.post and late.censored

    def test_no_spell_lost(self):
        spells = [self.spell("2010-01-01", "2018-01-01"),
                  self.spell("2015-01-01", "2022-01-01"),
                  self.spell("2021-01-01")]
        split = segment_periods(spells, self.SEG)
        assert len(split.pre) + len(split.post) >= len(spells)

    def test_cutoff_outside_range_fatal(self):
        with pytest.raises(ValueError):
            segment_periods([self.spell("2010-01-01", "2018-01-01")],
                            PeriodSegmentation(cutoff_date=date(2001, 1, 1),
                                               observation_end=date(2025, 1, 31)))

    def test_cutoff_order_validated(self):
        with pytest.raises(ValueError):
            PeriodSegmentation(cutoff_date=date(2026, 1, 1),
                               observation_end=date(2025, 1, 31))


def test_spell_arrays_and_summary():
    from tenurekit.ingest import IngestResult
    recs = [txn("P1", sale="2000-01-01"), txn("P1", sale="2010-01-01"),
            txn("P2", sale="2018-01-01")]
    spells = filter_genuine(build_spells(recs))
    dur, evt = spell_arrays(spells)
    assert dur.size == 3
    assert evt.sum() == 1
    summary = ingest_summary(IngestResult(records=recs), spells)
    assert summary["spells"] == 3
    assert summary["closed_spells"] == 1
    assert summary["genuine_closed_spells"] == 1
