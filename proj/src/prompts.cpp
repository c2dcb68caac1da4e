#include "clear/prompts.hpp"

namespace clear::prompts {

namespace {

constexpr std::string_view kChooseOne =
    "You can only use one of these, do not modify or invent your own options. Put the selected "
    "option in between ### and ###";

}  // namespace

std::string_view question(DataItem item) {
  switch (item) {
    case DataItem::building_age: return "What is the age of this apartment?";
    case DataItem::lighting: return "What type of lighting does this apartment have?";
    case DataItem::heating: return "What type of heating does this apartment have?";
    case DataItem::windows: return "What type of windows does this apartment have?";
    case DataItem::windows_uvalue: return "What is the U-value of the windows in this apartment?";
    case DataItem::energy:
      return "Estimate the energy consumption in kwh per metre squared for the following apartment.";
  }
  return {};
}

std::string_view instructions(DataItem item) {
  switch (item) {
    case DataItem::building_age:
      return "Finally, select one of these options: before 1900, 1900-1930, 1930-1950, 1950-1970, "
             "1970-1990, 1990-2020, 2020-now";
    case DataItem::lighting:
      return "Finally, select one of these options: no low energy lighting, low energy in 20%, low "
             "energy in 40%, low energy in 60%, low energy in 80%, low energy in 100%";
    case DataItem::heating:
      return "Finally, select one of these options: underfloor heating, water radiators, electric "
             "heaters, electric storage heaters, warm air from vents";
    case DataItem::windows:
      return "Finally, select one option: (1) single glazed, (2) double glazed, (3) high efficiency "
             "double or triple glazed";
    case DataItem::windows_uvalue:
      return "Finally, give an estimate of the U-value of the windows in W/m2K";
    case DataItem::energy:
      return "Finally, give an estimate of the kwh. A highly efficient apartment might have a kwh/m2 "
             "value as low as 35 or better. An inefficient apartment might have a kwh/m2 value as "
             "high as 450 or worse";
  }
  return {};
}

std::string_view final_instructions(DataItem item) {
  switch (item) {
    case DataItem::energy:
      return "Put the estimated kwh in between ### and ###. Do not include any other text apart "
             "from the kwh values";
    case DataItem::windows_uvalue:
      return "Put the estimated U-value in between ### and ###. Do not include any other text apart "
             "from the U-value";
    default: return kChooseOne;
  }
}

std::string evaluation(DataItem item, std::string_view region, std::string_view cue_list) {
  std::string p;
  p += "The images below belong to the same apartment. The building is located in ";
  p += region;
  p += ".\n";
  p += question(item);
  p += "\nMake your judgement focusing on the presence of the following features: ";
  p += cue_list;
  p += "\nFor each feature, say yes if it is visible, no if it is not visible or n/a if it is not "
       "applicable, then provide a short explanation.\n";
  p += instructions(item);
  p += ".\n";
  p += final_instructions(item);
  return p;
}

std::string feature_extraction(DataItem item, std::string_view region) {
  std::string_view task;
  switch (item) {
    case DataItem::building_age:
      task = "Your task is to provide a detailed label of every architectural feature for the "
             "building that will help determine the age of the building whether it is before 1900, "
             "1900-1930, 1930-1950, 1950-1970, 1970-1990, 1990-2020, 2020-now. List 50 visible "
             "features that are significant for building age.";
      break;
    case DataItem::lighting:
      task = "Your task is to provide a detailed label of every visible feature in the images "
             "relating to artificial lights for the building that will help determine the type of "
             "lighting whether it is no low energy lighting, low energy in 20%, low energy in 40%, "
             "low energy in 60%, low energy in 80%, low energy in 100%. List 50 visible features "
             "that are significant for determining the type of bulbs used in the lights. Don't "
             "explain the label.";
      break;
    case DataItem::heating:
      task = "Your task is to provide a detailed label of every visible feature in the images "
             "relating to heating type that will help determine the type of heating used whether it "
             "is underfloor heating, water radiators, electric heaters, electric storage heaters or "
             "warm air from vents. List 50 visible features that are significant for determining "
             "the type of heating used in the apartment. Don't explain the label.";
      break;
    case DataItem::windows:
    case DataItem::windows_uvalue:
      task = "Your task is to provide a detailed label of every architectural feature for the "
             "building that will help determine whether the glazing in the windows is single, "
             "double, or high efficiency. List 50 detailed visible features that are significant "
             "for window types.";
      break;
    case DataItem::energy:
      task = "Your task is to provide a detailed label of every visible architectural feature, "
             "appliance and energy consuming device in the images that will help determine the "
             "energy consumption in kwh per metre squared. Do not list furnishings or belongings, "
             "focus on visible items relevant to energy consumption or saving. List 50, with no "
             "explanations.";
      break;
  }
  std::string p = "You are a surveyor. You are given a set of images that belong to the same building.\n";
  p += task;
  p += "\nThe building is located in ";
  p += region;
  p += ". Return the features as a list.";
  return p;
}

std::string age_clustering(std::string_view building_rows) {
  std::string p =
      "You are a surveyor. You are given this list of buildings, each row is a building with their "
      "id and the year they are built. First group the buildings by 3 eras to ensure good coverage "
      "representative of the architectural style and dataset, then return the ids of buildings per "
      "era in an array.\n";
  p += building_rows;
  return p;
}

std::string dedup_and_cluster(std::string_view raw_feature_list) {
  std::string p = "I have a list of features: ";
  p += raw_feature_list;
  p += ". First, remove duplicated items, including features semantically similar. Then cluster "
       "these features based on the type of feature. Aim to produce 8 clusters.";
  return p;
}

std::string formatting(std::string_view categories) {
  std::string p = "Given this list ";
  p += categories;
  p += ", first clean the list to contain text only, then produce a python array, each subarray for "
       "each category. The first element of each subarray is the category name.";
  return p;
}

}  // namespace clear::prompts
