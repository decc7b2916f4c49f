//! Reference tables for the 20 two-digit NAICS industries and the 22 major
//! SOC occupation groups.

use serde::{Deserialize, Serialize};

pub type IndustryId = usize;
pub type OccupationId = usize;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndustryInfo {
    pub code: String,
    pub name: String,
    /// Consumption requires physical co-presence with the customer.
    pub customer_facing: bool,
    /// Fraction of in-person workers allowed on site under closure, local region.
    pub essential_local: f64,
    /// Same for the rest of the country.
    pub essential_rest: f64,
    /// Number of community places of this industry in the reference place list.
    pub places: u32,
    /// Total co-location weight observed at those places (visit popularity).
    pub community_weight: f64,
}

/// code, name, places, community weight, customer facing, local essential score
const NAICS: [(&str, &str, u32, f64, bool, f64); 20] = [
    ("11", "Agriculture, forestry, fishing and hunting", 0, 0.0, false, 1.00),
    ("21", "Mining, quarrying, and oil and gas extraction", 0, 0.0, false, 1.00),
    ("22", "Utilities", 0, 0.0, false, 1.00),
    ("23", "Construction", 192, 3193.0, false, 0.49),
    ("31-33", "Manufacturing", 1101, 12824.0, false, 0.56),
    ("42", "Wholesale trade", 0, 0.0, false, 0.81),
    ("44-45", "Retail trade", 53108, 14091171.0, true, 0.65),
    ("48-49", "Transportation and warehousing", 27210, 935324.0, true, 0.99),
    ("51", "Information", 2379, 1897.0, false, 0.78),
    ("52", "Finance and insurance", 11812, 501401.0, false, 1.00),
    ("53", "Real estate, rental and leasing", 3285, 27913.0, false, 0.91),
    ("54", "Professional, scientific, and technical services", 12519, 171610.0, false, 0.60),
    ("55", "Management of companies and enterprises", 189, 0.0, false, 1.00),
    ("56", "Administrative and support and waste", 3201, 10898.0, false, 0.45),
    ("61", "Educational services", 19305, 2153993.0, true, 0.40),
    ("62", "Health care and social assistance", 28438, 1433625.0, true, 1.00),
    ("71", "Arts, entertainment, and recreation", 49717, 4203783.0, true, 0.00),
    ("72", "Accommodation and food services", 67877, 6006817.0, true, 0.22),
    ("81", "Other services, except public administration", 37573, 1646087.0, true, 0.66),
    ("92", "Public administration", 6055, 264724.0, false, 1.00),
];

/// Places with no economic activity (parks, rivers, plazas).
pub const NON_ECONOMIC_PLACES: u32 = 43571;
pub const NON_ECONOMIC_WEIGHT: f64 = 1742638.0;

pub const CONSTRUCTION: IndustryId = 3;
pub const MANUFACTURING: IndustryId = 4;
pub const RETAIL: IndustryId = 6;
pub const FINANCE: IndustryId = 9;
pub const REAL_ESTATE: IndustryId = 10;
pub const EDUCATION: IndustryId = 14;
pub const HEALTH: IndustryId = 15;
pub const ARTS: IndustryId = 16;
pub const ACCOMMODATION_FOOD: IndustryId = 17;

/// Rest-of-country essential scores that differ from the local ones.
const REST_OVERRIDES: [(IndustryId, f64); 2] = [(CONSTRUCTION, 0.94), (MANUFACTURING, 0.86)];

pub fn default_industries() -> Vec<IndustryInfo> {
    NAICS
        .iter()
        .enumerate()
        .map(|(k, &(code, name, places, weight, cf, ess))| {
            let essential_rest = REST_OVERRIDES
                .iter()
                .find(|(id, _)| *id == k)
                .map_or(ess, |&(_, v)| v);
            IndustryInfo {
                code: code.to_string(),
                name: name.to_string(),
                customer_facing: cf,
                essential_local: ess,
                essential_rest,
                places,
                community_weight: weight,
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OccupationInfo {
    pub code: String,
    pub title: String,
    /// Remote labor index: probability a worker can work from home.
    pub remote_labor_index: f64,
}

const SOC: [(&str, &str, f64); 22] = [
    ("11-0000", "Management Occupations", 0.71),
    ("13-0000", "Business and Financial Operations Occupations", 0.77),
    ("15-0000", "Computer and Mathematical Occupations", 0.72),
    ("17-0000", "Architecture and Engineering Occupations", 0.63),
    ("19-0000", "Life, Physical, and Social Science Occupations", 0.49),
    ("21-0000", "Community and Social Service Occupations", 0.59),
    ("23-0000", "Legal Occupations", 0.54),
    ("25-0000", "Education, Training, and Library Occupations", 0.59),
    ("27-0000", "Arts, Design, Entertainment, Sports, and Media Occupations", 0.64),
    ("29-0000", "Healthcare Practitioners and Technical Occupations", 0.34),
    ("31-0000", "Healthcare Support Occupations", 0.18),
    ("33-0000", "Protective Service Occupations", 0.19),
    ("35-0000", "Food Preparation and Serving Related Occupations", 0.34),
    ("37-0000", "Building and Grounds Cleaning and Maintenance Occupations", 0.18),
    ("39-0000", "Personal Care and Service Occupations", 0.28),
    ("41-0000", "Sales and Related Occupations", 0.65),
    ("43-0000", "Office and Administrative Support Occupations", 0.54),
    ("45-0000", "Farming, Fishing, and Forestry Occupations", 0.09),
    ("47-0000", "Construction and Extraction Occupations", 0.21),
    ("49-0000", "Installation, Maintenance, and Repair Occupations", 0.19),
    ("51-0000", "Production Occupations", 0.17),
    ("53-0000", "Transportation and Material Moving Occupations", 0.18),
];

pub const MANAGEMENT_OCC: OccupationId = 0;
pub const FOOD_PREP_OCC: OccupationId = 12;
pub const PRODUCTION_OCC: OccupationId = 20;

pub fn default_occupations() -> Vec<OccupationInfo> {
    SOC.iter()
        .map(|&(code, title, rli)| OccupationInfo {
            code: code.to_string(),
            title: title.to_string(),
            remote_labor_index: rli,
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seven_customer_facing_industries() {
        let cf: Vec<String> = default_industries()
            .into_iter()
            .filter(|i| i.customer_facing)
            .map(|i| i.code)
            .collect();
        assert_eq!(cf, ["44-45", "48-49", "61", "62", "71", "72", "81"]);
    }

    #[test]
    fn rest_scores_never_below_local() {
        for ind in default_industries() {
            assert!(ind.essential_rest >= ind.essential_local, "{}", ind.name);
        }
        let inds = default_industries();
        assert_eq!(inds[CONSTRUCTION].essential_rest, 0.94);
        assert_eq!(inds[MANUFACTURING].essential_rest, 0.86);
    }

    #[test]
    fn rli_table_values() {
        let occ = default_occupations();
        assert_eq!(occ.len(), 22);
        assert_eq!(occ[MANAGEMENT_OCC].remote_labor_index, 0.71);
        assert_eq!(occ[PRODUCTION_OCC].remote_labor_index, 0.17);
    }
}
